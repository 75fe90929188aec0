//! Space-time rectangle, invariant-band partition, condition discretization
//! and collocation sampling.
//!
//! Dividing lines are level sets `I1(x, t) = C` of the group's first
//! invariant. A partition with thresholds `C_0 > C_1 > ... > C_{n-1}` has
//! `n + 1` sub-domains ordered by decreasing invariant band; band `i` is the
//! half-open slab `[C_i, C_{i-1})` intersected with the rectangle, so points
//! exactly on a dividing line deterministically belong to the larger-`I1`
//! side.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::symmetry::{Composition, SymmetryGroup};

/// Axis-aligned space-time rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainRect {
    pub x_min: f64,
    pub x_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl DomainRect {
    pub fn new(x_min: f64, x_max: f64, t_min: f64, t_max: f64) -> Result<Self> {
        if !(x_min < x_max && t_min < t_max) {
            return Err(Error::Geometry(format!(
                "degenerate rectangle [{x_min}, {x_max}] x [{t_min}, {t_max}]"
            )));
        }
        Ok(Self { x_min, x_max, t_min, t_max })
    }

    pub fn contains(&self, x: f64, t: f64) -> bool {
        x >= self.x_min && x <= self.x_max && t >= self.t_min && t <= self.t_max
    }

    /// Containment of the closure up to a small tolerance, for points that
    /// land on the boundary after floating-point group transport.
    pub fn contains_closure(&self, x: f64, t: f64, tol: f64) -> bool {
        x >= self.x_min - tol && x <= self.x_max + tol && t >= self.t_min - tol && t <= self.t_max + tol
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.t_max - self.t_min)
    }
}

/// The four rectangle edges. Initial/left/right carry condition data; the
/// terminal edge only participates in bounding-box computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// `t = t_min`, parametrized by x.
    Initial,
    /// `x = x_min`, parametrized by t.
    Left,
    /// `x = x_max`, parametrized by t.
    Right,
    /// `t = t_max`, parametrized by x.
    Terminal,
}

impl Edge {
    fn param_range(self, rect: &DomainRect) -> (f64, f64) {
        match self {
            Edge::Initial | Edge::Terminal => (rect.x_min, rect.x_max),
            Edge::Left | Edge::Right => (rect.t_min, rect.t_max),
        }
    }

    fn point(self, rect: &DomainRect, s: f64) -> (f64, f64) {
        match self {
            Edge::Initial => (s, rect.t_min),
            Edge::Terminal => (s, rect.t_max),
            Edge::Left => (rect.x_min, s),
            Edge::Right => (rect.x_max, s),
        }
    }

    const CONDITION_EDGES: [Edge; 3] = [Edge::Initial, Edge::Left, Edge::Right];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Initial,
    Boundary,
    Interface,
}

impl SegmentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SegmentKind::Initial => "initial",
            SegmentKind::Boundary => "boundary",
            SegmentKind::Interface => "interface",
        }
    }
}

/// Where a sub-domain's exact condition data lives.
#[derive(Debug, Clone)]
pub enum SegmentGeometry {
    /// Portion of a rectangle edge: parameter interval `[lo, hi]`.
    Edge { edge: Edge, lo: f64, hi: f64 },
    /// Dividing line `I1 = threshold`.
    Interface { threshold: f64 },
}

/// One exact-condition segment of a sub-domain.
#[derive(Debug, Clone)]
pub struct ConditionSegment {
    pub kind: SegmentKind,
    pub geometry: SegmentGeometry,
}

/// A labeled training point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub x: f64,
    pub t: f64,
    pub u: f64,
    pub kind: SegmentKind,
}

/// A band of the first invariant intersected with the rectangle.
#[derive(Debug, Clone)]
pub struct SubDomain {
    pub index: usize,
    /// Band `[c_lo, c_hi)`; either bound may be infinite.
    pub c_lo: f64,
    pub c_hi: f64,
    pub rect: DomainRect,
    pub segments: Vec<ConditionSegment>,
    /// Tight bounding box of the band within the rectangle.
    pub bbox: DomainRect,
    group: SymmetryGroup,
}

impl SubDomain {
    /// Membership: inside the rectangle and `c_lo <= I1 < c_hi`.
    pub fn contains(&self, x: f64, t: f64) -> bool {
        if !self.rect.contains(x, t) {
            return false;
        }
        match self.group.invariant1(x, t) {
            Ok(i1) => i1 >= self.c_lo && i1 < self.c_hi,
            Err(_) => false,
        }
    }

    /// Latin hypercube sample of `n` interior points, drawn over the bounding
    /// box with rejection of points outside the band and refilled until `n`
    /// are accepted. Deterministic per seed.
    pub fn sample_collocation_lhs(&self, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
        if n == 0 {
            return Err(Error::Geometry("requested zero collocation points".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut accepted = Vec::with_capacity(n);
        let mut drawn = 0usize;
        while accepted.len() < n {
            for p in lhs_rect(&self.bbox, n, &mut rng) {
                drawn += 1;
                if self.contains(p.0, p.1) {
                    accepted.push(p);
                    if accepted.len() == n {
                        break;
                    }
                }
            }
            if drawn >= 1_000_000 && (accepted.len() as f64) < 1e-3 * drawn as f64 {
                return Err(Error::Geometry(format!(
                    "rejection sampling acceptance rate below 1e-3 after {drawn} draws in sub-domain {}",
                    self.index
                )));
            }
        }
        Ok(accepted)
    }

    /// Thresholds of the dividing lines bordering this band.
    pub fn interface_thresholds(&self) -> Vec<f64> {
        self.segments
            .iter()
            .filter_map(|s| match s.geometry {
                SegmentGeometry::Interface { threshold } => Some(threshold),
                _ => None,
            })
            .collect()
    }
}

/// One Latin hypercube batch of `n` points over a rectangle.
fn lhs_rect(rect: &DomainRect, n: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let mut strata_x: Vec<usize> = (0..n).collect();
    let mut strata_t: Vec<usize> = (0..n).collect();
    strata_x.shuffle(rng);
    strata_t.shuffle(rng);
    (0..n)
        .map(|i| {
            let ux: f64 = rng.random();
            let ut: f64 = rng.random();
            let x = rect.x_min + (strata_x[i] as f64 + ux) / n as f64 * (rect.x_max - rect.x_min);
            let t = rect.t_min + (strata_t[i] as f64 + ut) / n as f64 * (rect.t_max - rect.t_min);
            (x, t)
        })
        .collect()
}

/// Latin hypercube sample over the whole rectangle (no rejection).
pub fn sample_rect_lhs(rect: &DomainRect, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lhs_rect(rect, n, &mut rng)
}

/// A partition of the rectangle into invariant bands.
#[derive(Debug, Clone)]
pub struct Partition {
    pub rect: DomainRect,
    /// Dividing-line levels, strictly decreasing.
    pub thresholds: Vec<f64>,
    pub subdomains: Vec<SubDomain>,
    group: SymmetryGroup,
}

impl Partition {
    pub fn group(&self) -> &SymmetryGroup {
        &self.group
    }

    /// Sub-domain index of an interior point; points on a dividing line go to
    /// the larger-invariant band.
    pub fn classify(&self, x: f64, t: f64) -> Result<usize> {
        if !self.rect.contains(x, t) {
            return Err(Error::Domain(format!(
                "point ({x}, {t}) lies outside the rectangle"
            )));
        }
        let i1 = self.group.invariant1(x, t)?;
        for (k, &c) in self.thresholds.iter().enumerate() {
            if i1 >= c {
                return Ok(k);
            }
        }
        Ok(self.thresholds.len())
    }
}

/// Finds `s` in `[lo, hi]` with `f(s) = target` by bisection; `f` must be
/// continuous and monotone on the interval.
fn bisect_level(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, target: f64) -> f64 {
    let (f_lo, f_hi) = (f(lo), f(hi));
    let increasing = f_hi >= f_lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if (fm < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Clips one edge to the band `[c_lo, c_hi]`, returning the parameter
/// interval where the band condition holds (closed, endpoints on the band
/// boundary found by bisection). `I1` must be monotone along the edge.
fn clip_edge(
    group: &SymmetryGroup,
    rect: &DomainRect,
    edge: Edge,
    c_lo: f64,
    c_hi: f64,
) -> Result<Option<(f64, f64)>> {
    let (s0, s1) = edge.param_range(rect);
    let eval = |s: f64| {
        let (x, t) = edge.point(rect, s);
        group.invariant1(x, t).unwrap_or(f64::NAN)
    };
    let (i0, i1) = (eval(s0), eval(s1));
    if i0.is_nan() || i1.is_nan() {
        return Err(Error::Geometry(
            "invariant undefined on a rectangle edge".into(),
        ));
    }
    // Order so the invariant increases from a to b.
    let (a, b, ia, ib) = if i0 <= i1 { (s0, s1, i0, i1) } else { (s1, s0, i1, i0) };
    if ib < c_lo || ia > c_hi {
        return Ok(None);
    }
    let lo = if ia >= c_lo { a } else { bisect_level(&eval, a, b, c_lo) };
    let hi = if ib <= c_hi { b } else { bisect_level(&eval, a, b, c_hi) };
    let (lo, hi) = (lo.min(hi), lo.max(hi));
    if hi <= lo {
        return Ok(None);
    }
    Ok(Some((lo, hi)))
}

/// Splits the rectangle along the level sets `I1 = C` for each threshold.
///
/// Thresholds may be given in increasing or decreasing order but must be
/// strictly monotone and each level set must cross the rectangle. Returns
/// `n + 1` sub-domains ordered by decreasing band, each carrying its clipped
/// initial/boundary segments and the interfaces on both sides.
pub fn partition(rect: DomainRect, group: &SymmetryGroup, thresholds: &[f64]) -> Result<Partition> {
    let mut levels = thresholds.to_vec();
    if levels.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("thresholds must be strictly monotone".into()));
    }
    let increasing = levels.windows(2).all(|w| w[0] < w[1]);
    let decreasing = levels.windows(2).all(|w| w[0] > w[1]);
    if !increasing && !decreasing {
        return Err(Error::Config(format!(
            "thresholds must be sorted monotonically, got {levels:?}"
        )));
    }
    if increasing {
        levels.reverse();
    }

    // Invariant range over the rectangle: extremes lie at the corners for
    // invariants monotone in each coordinate.
    let corners = [
        (rect.x_min, rect.t_min),
        (rect.x_min, rect.t_max),
        (rect.x_max, rect.t_min),
        (rect.x_max, rect.t_max),
    ];
    let mut i_min = f64::INFINITY;
    let mut i_max = f64::NEG_INFINITY;
    for (x, t) in corners {
        let v = group.invariant1(x, t)?;
        i_min = i_min.min(v);
        i_max = i_max.max(v);
    }
    for &c in &levels {
        if !(c > i_min && c < i_max) {
            return Err(Error::Config(format!(
                "dividing line I1 = {c} does not cross the rectangle (invariant range [{i_min}, {i_max}])"
            )));
        }
    }

    let n_bands = levels.len() + 1;
    let mut subdomains = Vec::with_capacity(n_bands);
    for index in 0..n_bands {
        let c_hi = if index == 0 { f64::INFINITY } else { levels[index - 1] };
        let c_lo = if index == levels.len() { f64::NEG_INFINITY } else { levels[index] };

        let mut segments = Vec::new();
        let mut bbox_pts: Vec<(f64, f64)> = Vec::new();
        for edge in [Edge::Initial, Edge::Left, Edge::Right, Edge::Terminal] {
            if let Some((lo, hi)) = clip_edge(group, &rect, edge, c_lo, c_hi)? {
                bbox_pts.push(edge.point(&rect, lo));
                bbox_pts.push(edge.point(&rect, hi));
                if Edge::CONDITION_EDGES.contains(&edge) {
                    let kind = if edge == Edge::Initial {
                        SegmentKind::Initial
                    } else {
                        SegmentKind::Boundary
                    };
                    segments.push(ConditionSegment {
                        kind,
                        geometry: SegmentGeometry::Edge { edge, lo, hi },
                    });
                }
            }
        }
        if bbox_pts.is_empty() {
            return Err(Error::Geometry(format!(
                "band [{c_lo}, {c_hi}] does not touch the rectangle boundary"
            )));
        }
        if c_hi.is_finite() {
            segments.push(ConditionSegment {
                kind: SegmentKind::Interface,
                geometry: SegmentGeometry::Interface { threshold: c_hi },
            });
        }
        if c_lo.is_finite() {
            segments.push(ConditionSegment {
                kind: SegmentKind::Interface,
                geometry: SegmentGeometry::Interface { threshold: c_lo },
            });
        }

        let bbox = DomainRect::new(
            bbox_pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
            bbox_pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
            bbox_pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
            bbox_pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        )
        .map_err(|_| {
            Error::Geometry(format!("band [{c_lo}, {c_hi}] degenerates to a line"))
        })?;

        subdomains.push(SubDomain {
            index,
            c_lo,
            c_hi,
            rect,
            segments,
            bbox,
            group: group.clone(),
        });
    }

    Ok(Partition {
        rect,
        thresholds: levels,
        subdomains,
        group: group.clone(),
    })
}

/// Equidistant labeled points on the sub-domain's initial/boundary segments.
///
/// The grids are laid over the full edges (`n_x` points on the initial edge,
/// `n_t` on each lateral boundary) and then filtered by band membership, so
/// the union over all sub-domains is exactly the whole-rectangle point set.
/// Labels are the problem's exact solution.
pub fn discretize_conditions(
    problem: &Problem,
    sub: &SubDomain,
    n_x: usize,
    n_t: usize,
) -> Result<Vec<LabeledPoint>> {
    if n_x < 2 || n_t < 2 {
        return Err(Error::Config("condition grids need at least 2 points per edge".into()));
    }
    let rect = &sub.rect;
    let mut out = Vec::new();
    let push = |x: f64, t: f64, kind: SegmentKind, out: &mut Vec<LabeledPoint>| -> Result<()> {
        if sub.contains(x, t) {
            out.push(LabeledPoint { x, t, u: problem.exact_solution(x, t)?, kind });
        }
        Ok(())
    };
    for i in 0..n_x {
        let x = rect.x_min + (rect.x_max - rect.x_min) * i as f64 / (n_x - 1) as f64;
        push(x, rect.t_min, SegmentKind::Initial, &mut out)?;
    }
    for j in 0..n_t {
        let t = rect.t_min + (rect.t_max - rect.t_min) * j as f64 / (n_t - 1) as f64;
        push(rect.x_min, t, SegmentKind::Boundary, &mut out)?;
        push(rect.x_max, t, SegmentKind::Boundary, &mut out)?;
    }
    Ok(out)
}

/// Seed point of the dividing line `I1 = c` on the initial/boundary edges.
fn interface_seed(
    group: &SymmetryGroup,
    rect: &DomainRect,
    c: f64,
) -> Result<(f64, f64)> {
    for edge in Edge::CONDITION_EDGES {
        let (s0, s1) = edge.param_range(rect);
        let eval = |s: f64| {
            let (x, t) = edge.point(rect, s);
            group.invariant1(x, t).unwrap_or(f64::NAN)
        };
        let (i0, i1) = (eval(s0), eval(s1));
        if (i0 - c) * (i1 - c) <= 0.0 && i0.is_finite() && i1.is_finite() {
            let s = if i0 == c {
                s0
            } else if i1 == c {
                s1
            } else {
                bisect_level(&eval, s0, s1, c)
            };
            return Ok(edge.point(rect, s));
        }
    }
    Err(Error::Config(format!(
        "no initial/boundary seed found on the dividing line I1 = {c}"
    )))
}

/// Largest group parameter (relative to the identity) that keeps the seed's
/// image inside the rectangle, found by doubling and bisection on the exit.
fn exit_parameter(
    group: &SymmetryGroup,
    rect: &DomainRect,
    seed: (f64, f64, f64),
    forward: bool,
) -> Option<f64> {
    // Work in an additive coordinate: param(s) = id + s or id ± exp-scaled.
    let to_param = |s: f64| match group.composition() {
        Composition::Additive => {
            if forward {
                s
            } else {
                -s
            }
        }
        Composition::Multiplicative => {
            if forward {
                s.exp()
            } else {
                (-s).exp()
            }
        }
    };
    let inside = |s: f64| {
        group
            .apply_param(seed, to_param(s))
            .map(|(x, t, _)| rect.contains_closure(x, t, 1e-12))
            .unwrap_or(false)
    };
    if !inside(1e-12) {
        return None;
    }
    // Bracket the exit by doubling.
    let mut hi = 1e-6;
    let mut lo = 0.0;
    while inside(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(to_param(lo))
}

/// `n + 1` labeled points spanning the dividing line `I1 = c` inside the
/// rectangle.
///
/// The seed is the line's intersection with the initial/boundary conditions;
/// ε is chosen so the n-th group action lands on the line's exit point, and
/// labels ride along the group's u-component from the seed's exact value.
pub fn interface_points(
    group: &SymmetryGroup,
    problem: &Problem,
    c: f64,
    rect: &DomainRect,
    n: usize,
) -> Result<Vec<LabeledPoint>> {
    if n == 0 {
        return Err(Error::Config("interface needs at least one group action".into()));
    }
    let (sx, st) = interface_seed(group, rect, c)?;
    let seed = (sx, st, problem.exact_solution(sx, st)?);

    let span = exit_parameter(group, rect, seed, true)
        .or_else(|| exit_parameter(group, rect, seed, false))
        .ok_or_else(|| {
            Error::Config(format!(
                "the orbit from the seed of I1 = {c} exits the rectangle immediately"
            ))
        })?;

    // Per-step parameter: span/n additively, span^(1/n) multiplicatively.
    let eps = match group.composition() {
        Composition::Additive => span / n as f64,
        Composition::Multiplicative => span.powf(1.0 / n as f64),
    };
    let orbit = group.orbit(seed, eps, n)?;
    Ok(orbit
        .into_iter()
        .map(|(x, t, u)| LabeledPoint { x, t, u, kind: SegmentKind::Interface })
        .collect())
}
