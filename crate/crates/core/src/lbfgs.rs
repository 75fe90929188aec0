//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! Full-batch quasi-Newton training for every session in this crate. The
//! search direction comes from the standard two-loop recursion over the m
//! most recent curvature pairs with initial scaling `γ = sᵀy / yᵀy`; the line
//! search brackets and zooms with safeguarded cubic interpolation.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimConfig {
    /// Number of stored curvature pairs.
    pub memory: usize,
    /// Iteration cap.
    pub max_iters: usize,
    /// Stop when the gradient norm falls below this.
    pub grad_tol: f64,
    /// Stop when the relative loss change falls below this.
    pub loss_tol: f64,
    /// Armijo (sufficient-decrease) constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iters: 20_000,
            grad_tol: 1e-9,
            loss_tol: 1e-12,
            c1: 1e-4,
            c2: 0.9,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::Config(format!(
                "line-search constants must satisfy 0 < c1 < c2 < 1, got c1={} c2={}",
                self.c1, self.c2
            )));
        }
        if self.memory == 0 {
            return Err(Error::Config("memory must be at least 1".into()));
        }
        if !(self.grad_tol > 0.0) || !(self.loss_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Why a minimization stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradTol,
    LossTol,
    MaxIters,
    LineSearchFailure,
    NonFinite,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::GradTol => "grad_tol",
            Termination::LossTol => "loss_tol",
            Termination::MaxIters => "max_iters",
            Termination::LineSearchFailure => "line_search_failure",
            Termination::NonFinite => "non_finite",
        };
        f.write_str(s)
    }
}

/// One accepted iteration.
#[derive(Debug, Clone, Copy)]
pub struct TraceRecord {
    pub iter: usize,
    /// Loss at the accepted iterate.
    pub loss: f64,
    /// Gradient norm at the accepted iterate.
    pub grad_norm: f64,
    /// Accepted step length.
    pub step: f64,
    /// Loss before the step (for sufficient-decrease checks).
    pub loss_before: f64,
    /// Directional derivative φ'(0) along the search direction.
    pub slope0: f64,
    /// Directional derivative φ'(step) at the accepted point.
    pub slope_alpha: f64,
    /// True when the line search certified only sufficient decrease.
    pub weak: bool,
}

/// Exact record of every accepted iteration plus the stop reason.
#[derive(Debug, Clone)]
pub struct OptTrace {
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
    /// Times the direction was reset to steepest descent.
    pub direction_resets: usize,
    /// Total objective evaluations.
    pub evaluations: usize,
}

impl OptTrace {
    /// CSV rows `iteration,loss,grad_norm,step` with round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,loss,grad_norm,step\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e}\n",
                r.iter, r.loss, r.grad_norm, r.step
            ));
        }
        out
    }
}

/// Outcome of a strong-Wolfe line search.
#[derive(Debug, Clone, Copy)]
pub struct LineSearchStep {
    pub alpha: f64,
    pub loss: f64,
    pub slope: f64,
    /// True when only the sufficient-decrease condition could be certified
    /// (zoom exhausted its budget before meeting the curvature condition).
    pub weak: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineSearchFailure {
    /// φ' stayed negative up to the step cap; no curvature point exists on
    /// the searched ray (e.g. a linearly decreasing objective).
    BoundedStep { last_step: f64 },
    /// Not a descent direction (φ'(0) >= 0).
    NotDescent,
    /// No acceptable point found.
    NoDecrease,
}

const MAX_BRACKET: usize = 60;
const MAX_ZOOM: usize = 40;

/// Cubic minimizer of a 1-D restriction from two (point, value, slope) pairs,
/// clamped to `bounds`; falls back to bisection when degenerate.
fn cubic_interpolate(x1: f64, f1: f64, g1: f64, x2: f64, f2: f64, g2: f64, bounds: (f64, f64)) -> f64 {
    let (lo, hi) = bounds;
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
    let d2_sq = d1 * d1 - g1 * g2;
    if d2_sq >= 0.0 {
        let d2 = d2_sq.sqrt();
        let min_pos = if x1 <= x2 {
            x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
        } else {
            x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
        };
        if min_pos.is_finite() {
            return min_pos.clamp(lo, hi);
        }
    }
    0.5 * (lo + hi)
}

/// Strong-Wolfe line search on a 1-D restriction φ.
///
/// `phi` returns `(φ(α), φ'(α))`; `phi0`/`dphi0` are the values at α = 0.
/// The returned step satisfies both Wolfe conditions, or sufficient decrease
/// alone with `weak = true` when the zoom budget runs out. The final call to
/// `phi` is always at the returned step, so callers may reuse state written
/// by their closure.
pub fn wolfe_line_search<F>(
    mut phi: F,
    phi0: f64,
    dphi0: f64,
    c1: f64,
    c2: f64,
    init_step: f64,
    max_step: f64,
) -> std::result::Result<LineSearchStep, LineSearchFailure>
where
    F: FnMut(f64) -> (f64, f64),
{
    if !(dphi0 < 0.0) {
        return Err(LineSearchFailure::NotDescent);
    }
    let armijo = |a: f64, fa: f64| fa <= phi0 + c1 * a * dphi0;

    // Bracketing phase.
    let mut a_prev = 0.0;
    let mut f_prev = phi0;
    let mut d_prev = dphi0;
    let mut a = init_step.min(max_step);
    let mut bracket = None;
    for i in 0..MAX_BRACKET {
        let (fa, da) = phi(a);
        if !fa.is_finite() || !armijo(a, fa) || (i > 0 && fa >= f_prev) {
            bracket = Some((a_prev, f_prev, d_prev, a, fa, da));
            break;
        }
        if da.abs() <= -c2 * dphi0 {
            return Ok(LineSearchStep { alpha: a, loss: fa, slope: da, weak: false });
        }
        if da >= 0.0 {
            bracket = Some((a, fa, da, a_prev, f_prev, d_prev));
            break;
        }
        if a >= max_step {
            return Err(LineSearchFailure::BoundedStep { last_step: a });
        }
        a_prev = a;
        f_prev = fa;
        d_prev = da;
        a = (4.0 * a).min(max_step);
    }
    let (mut a_lo, mut f_lo, mut d_lo, mut a_hi, mut f_hi, mut d_hi) = match bracket {
        Some(b) => b,
        None => return Err(LineSearchFailure::BoundedStep { last_step: a }),
    };

    // Zoom phase.
    for _ in 0..MAX_ZOOM {
        let width = (a_hi - a_lo).abs();
        if width <= 1e-16 * a_lo.abs().max(1.0) {
            break;
        }
        let (blo, bhi) = (a_lo.min(a_hi), a_lo.max(a_hi));
        let margin = 0.1 * width;
        let aj = if f_hi.is_finite() {
            cubic_interpolate(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi, (blo + margin, bhi - margin))
        } else {
            // Non-finite end: bisect toward the good side.
            0.5 * (a_lo + a_hi)
        };
        let (fj, dj) = phi(aj);
        if !fj.is_finite() || !armijo(aj, fj) || fj >= f_lo {
            a_hi = aj;
            f_hi = fj;
            d_hi = dj;
        } else {
            if dj.abs() <= -c2 * dphi0 {
                return Ok(LineSearchStep { alpha: aj, loss: fj, slope: dj, weak: false });
            }
            if dj * (a_hi - a_lo) >= 0.0 {
                a_hi = a_lo;
                f_hi = f_lo;
                d_hi = d_lo;
            }
            a_lo = aj;
            f_lo = fj;
            d_lo = dj;
        }
    }

    if a_lo > 0.0 && f_lo.is_finite() && armijo(a_lo, f_lo) {
        // Re-evaluate so the accepted point is the last φ call.
        let (fl, dl) = phi(a_lo);
        return Ok(LineSearchStep { alpha: a_lo, loss: fl, slope: dl, weak: true });
    }
    Err(LineSearchFailure::NoDecrease)
}

/// Two-loop recursion: applies the inverse-Hessian approximation to `g`,
/// returning the (negated) search direction.
fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    if history.is_empty() {
        q.iter_mut().for_each(|v| *v = -*v);
        return q;
    }
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    let (s_last, y_last, _) = history.back().unwrap();
    let gamma = dot(s_last, y_last) / dot(y_last, y_last);
    q.iter_mut().for_each(|v| *v *= gamma);
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimizes `objective` from `init`, returning the best-seen iterate and the
/// full iteration trace.
///
/// The objective writes its gradient into the provided slice and returns the
/// loss. Termination: gradient norm, relative loss change, iteration cap, or
/// an unrecoverable line-search failure (recorded, not an error). A
/// non-finite objective at the initial point is an error.
pub fn minimize<F>(objective: F, init: &[f64], config: &OptimConfig) -> Result<(Vec<f64>, OptTrace)>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    minimize_observed(objective, init, config, |_, _| {})
}

/// [`minimize`] with a callback invoked after every accepted iteration with
/// the iteration index and the current iterate. The last objective
/// evaluation before each callback is at that iterate.
pub fn minimize_observed<F, O>(
    mut objective: F,
    init: &[f64],
    config: &OptimConfig,
    mut observer: O,
) -> Result<(Vec<f64>, OptTrace)>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
    O: FnMut(usize, &[f64]),
{
    config.validate()?;
    let n = init.len();
    let mut p = init.to_vec();
    let mut g = vec![0.0; n];
    let mut loss = objective(&p, &mut g);
    let mut evaluations = 1;
    if !loss.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "objective non-finite at the initial point (loss = {loss})"
        )));
    }

    let mut best_loss = loss;
    let mut best_p = p.clone();
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut records = Vec::new();
    let mut direction_resets = 0;
    let mut termination = Termination::MaxIters;

    // Scratch for line-search trials.
    let mut p_trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];

    'outer: for iter in 1..=config.max_iters {
        let grad_norm = norm(&g);
        if grad_norm <= config.grad_tol {
            termination = Termination::GradTol;
            break;
        }

        let mut d = two_loop(&g, &history);
        let mut slope0 = dot(&d, &g);
        if !(slope0 < 0.0) || !slope0.is_finite() {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope0 = -grad_norm * grad_norm;
            direction_resets += 1;
        }

        // First iteration starts conservatively when the gradient is huge.
        let init_step = if records.is_empty() {
            (1.0f64).min(1.0 / grad_norm.max(1e-12))
        } else {
            1.0
        };

        let mut attempt = 0;
        let step = loop {
            let search = wolfe_line_search(
                |alpha| {
                    for i in 0..n {
                        p_trial[i] = p[i] + alpha * d[i];
                    }
                    evaluations += 1;
                    let l = objective(&p_trial, &mut g_trial);
                    (l, dot(&g_trial, &d))
                },
                loss,
                slope0,
                config.c1,
                config.c2,
                init_step,
                1e10,
            );
            match search {
                Ok(step) => break step,
                Err(_) if attempt == 0 && !history.is_empty() => {
                    // Retry once along steepest descent with fresh memory.
                    history.clear();
                    d = g.iter().map(|v| -v).collect();
                    slope0 = -grad_norm * grad_norm;
                    direction_resets += 1;
                    attempt = 1;
                }
                Err(_) => {
                    termination = Termination::LineSearchFailure;
                    break 'outer;
                }
            }
        };

        // The final φ evaluation was at the accepted step, so the trial
        // buffers hold the new iterate and gradient.
        let loss_before = loss;
        loss = step.loss;
        let mut s = vec![0.0; n];
        let mut y = vec![0.0; n];
        for i in 0..n {
            s[i] = p_trial[i] - p[i];
            y[i] = g_trial[i] - g[i];
        }
        p.copy_from_slice(&p_trial);
        g.copy_from_slice(&g_trial);

        if !loss.is_finite() || g.iter().any(|v| !v.is_finite()) {
            termination = Termination::NonFinite;
            break;
        }
        if loss < best_loss {
            best_loss = loss;
            best_p.copy_from_slice(&p);
        }
        records.push(TraceRecord {
            iter,
            loss,
            grad_norm: norm(&g),
            step: step.alpha,
            loss_before,
            slope0,
            slope_alpha: step.slope,
            weak: step.weak,
        });
        observer(iter, &p);

        if (loss_before - loss).abs() <= config.loss_tol * loss_before.abs().max(loss.abs()) {
            termination = Termination::LossTol;
            break;
        }

        // Curvature pair, skipped when sᵀy is too small to keep the
        // approximation positive definite.
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if history.len() == config.memory {
                history.pop_front();
            }
            let rho = 1.0 / sy;
            history.push_back((s, y, rho));
        }
    }

    Ok((
        best_p,
        OptTrace {
            records,
            termination,
            direction_resets,
            evaluations,
        },
    ))
}
