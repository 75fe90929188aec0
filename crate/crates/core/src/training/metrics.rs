//! Solution stitching and error metrics.

use crate::error::{Error, Result};
use crate::geometry::{LabeledPoint, Partition};
use crate::mlp::{forward_batch, Architecture, ParameterVector};
use crate::problems::Problem;

/// Predictions, exact values and band indices on an equidistant grid.
#[derive(Debug, Clone)]
pub struct SolutionGrid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    /// Row-major `[n_x × n_t]`: index `ix * n_t + it`.
    pub pred: Vec<f64>,
    pub exact: Vec<f64>,
    pub subdomain: Vec<usize>,
}

impl SolutionGrid {
    pub fn len(&self) -> usize {
        self.pred.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pred.is_empty()
    }
}

/// Evaluates each grid point with the network of its classified sub-domain.
///
/// `nets` holds one (architecture, parameters) pair per partition sub-domain,
/// or a single pair which is then used everywhere (whole-domain methods).
pub fn stitch(
    problem: &Problem,
    part: &Partition,
    nets: &[(Architecture, ParameterVector)],
    n_x: usize,
    n_t: usize,
) -> Result<SolutionGrid> {
    if n_x < 2 || n_t < 2 {
        return Err(Error::Config("solution grids need at least 2 points per axis".into()));
    }
    let single = match nets.len() {
        1 => true,
        n if n == part.subdomains.len() => false,
        n => {
            return Err(Error::Config(format!(
                "{n} networks for a partition with {} sub-domains",
                part.subdomains.len()
            )))
        }
    };
    let rect = part.rect;
    let xs: Vec<f64> = (0..n_x)
        .map(|i| rect.x_min + (rect.x_max - rect.x_min) * i as f64 / (n_x - 1) as f64)
        .collect();
    let ts: Vec<f64> = (0..n_t)
        .map(|j| rect.t_min + (rect.t_max - rect.t_min) * j as f64 / (n_t - 1) as f64)
        .collect();

    let total = n_x * n_t;
    let mut subdomain = vec![0usize; total];
    let mut exact = vec![0.0; total];
    let mut per_net_points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); nets.len()];
    let mut per_net_slots: Vec<Vec<usize>> = vec![Vec::new(); nets.len()];
    for (ix, &x) in xs.iter().enumerate() {
        for (it, &t) in ts.iter().enumerate() {
            let slot = ix * n_t + it;
            let band = part.classify(x, t)?;
            subdomain[slot] = band;
            exact[slot] = problem.exact_solution(x, t)?;
            let net_idx = if single { 0 } else { band };
            per_net_points[net_idx].push((x, t));
            per_net_slots[net_idx].push(slot);
        }
    }

    let mut pred = vec![0.0; total];
    for (idx, (arch, params)) in nets.iter().enumerate() {
        if per_net_points[idx].is_empty() {
            continue;
        }
        let values = forward_batch(params.as_slice(), arch, &per_net_points[idx])?;
        for (&slot, v) in per_net_slots[idx].iter().zip(values) {
            pred[slot] = v;
        }
    }

    Ok(SolutionGrid { xs, ts, pred, exact, subdomain })
}

/// `‖pred − exact‖₂ / ‖exact‖₂` over the whole grid or one band.
pub fn l2_relative_error(grid: &SolutionGrid, region: Option<usize>) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..grid.len() {
        if region.is_some_and(|r| grid.subdomain[i] != r) {
            continue;
        }
        let d = grid.pred[i] - grid.exact[i];
        num += d * d;
        den += grid.exact[i] * grid.exact[i];
    }
    if den == 0.0 {
        return Err(Error::Domain(
            "relative error is undefined for a region with zero exact norm".into(),
        ));
    }
    Ok((num / den).sqrt())
}

/// Max absolute jump `|u_left − u_right|` between two trained networks over
/// probe points (typically on a dividing line).
pub fn interface_discontinuity(
    left: (&Architecture, &ParameterVector),
    right: (&Architecture, &ParameterVector),
    probes: &[(f64, f64)],
) -> Result<f64> {
    let ul = forward_batch(left.1.as_slice(), left.0, probes)?;
    let ur = forward_batch(right.1.as_slice(), right.0, probes)?;
    Ok(ul
        .iter()
        .zip(&ur)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Root-mean-square misfit of a network against labeled points.
pub fn interface_fit_rmse(
    arch: &Architecture,
    params: &ParameterVector,
    points: &[LabeledPoint],
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Config("RMSE over an empty point set".into()));
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.t)).collect();
    let values = forward_batch(params.as_slice(), arch, &pts)?;
    let ms = values
        .iter()
        .zip(points)
        .map(|(v, p)| (v - p.u) * (v - p.u))
        .sum::<f64>()
        / points.len() as f64;
    Ok(ms.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::partition;
    use crate::mlp::init_xavier;

    fn kdv_setup() -> (Problem, Partition) {
        let p = Problem::kdv(20.0);
        let part = partition(p.rect(), p.group(), &[-0.5]).unwrap();
        (p, part)
    }

    #[test]
    fn single_network_grid_matches_direct_evaluation() {
        let (problem, part) = kdv_setup();
        let arch = Architecture::new(vec![2, 7, 1]).unwrap();
        let params = init_xavier(&arch, 5);
        let grid = stitch(&problem, &part, &[(arch.clone(), params.clone())], 20, 10).unwrap();
        assert_eq!(grid.len(), 200);
        let u = crate::mlp::forward(params.as_slice(), &arch, grid.xs[3], grid.ts[4]).unwrap();
        assert_eq!(grid.pred[3 * 10 + 4], u);
        // Exact values reproduce the manufactured solution.
        for i in 0..grid.len() {
            let (ix, it) = (i / 10, i % 10);
            let e = problem.exact_solution(grid.xs[ix], grid.ts[it]).unwrap();
            assert_eq!(grid.exact[i], e);
        }
    }

    #[test]
    fn band_counts_cover_the_grid_exactly() {
        let (problem, part) = kdv_setup();
        let arch = Architecture::new(vec![2, 4, 1]).unwrap();
        let nets = vec![
            (arch.clone(), init_xavier(&arch, 1)),
            (arch.clone(), init_xavier(&arch, 2)),
        ];
        let grid = stitch(&problem, &part, &nets, 40, 20).unwrap();
        let n0 = grid.subdomain.iter().filter(|&&s| s == 0).count();
        let n1 = grid.subdomain.iter().filter(|&&s| s == 1).count();
        assert_eq!(n0 + n1, 800);
        assert!(n0 > 0 && n1 > 0);
    }

    #[test]
    fn identical_networks_stitch_continuously() {
        let (problem, part) = kdv_setup();
        let arch = Architecture::new(vec![2, 9, 1]).unwrap();
        let params = init_xavier(&arch, 8);
        let nets = vec![(arch.clone(), params.clone()), (arch.clone(), params.clone())];
        let grid = stitch(&problem, &part, &nets, 30, 15).unwrap();
        let single = stitch(&problem, &part, &nets[..1], 30, 15).unwrap();
        for i in 0..grid.len() {
            assert!((grid.pred[i] - single.pred[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn l2_error_is_zero_for_exact_and_homogeneous() {
        let (problem, part) = kdv_setup();
        let arch = Architecture::new(vec![2, 4, 1]).unwrap();
        let mut grid = stitch(&problem, &part, &[(arch.clone(), init_xavier(&arch, 1))], 25, 12)
            .unwrap();
        grid.pred.copy_from_slice(&grid.exact);
        assert_eq!(l2_relative_error(&grid, None).unwrap(), 0.0);

        for (p, e) in grid.pred.iter_mut().zip(&grid.exact) {
            *p = 1.1 * e;
        }
        let err = l2_relative_error(&grid, None).unwrap();
        assert!((err - 0.1).abs() < 1e-12, "err = {err}");
    }

    #[test]
    fn constant_shift_error_matches_the_direct_norm_ratio() {
        let (problem, part) = kdv_setup();
        let arch = Architecture::new(vec![2, 4, 1]).unwrap();
        let mut grid = stitch(&problem, &part, &[(arch.clone(), init_xavier(&arch, 1))], 40, 20)
            .unwrap();
        let c = 0.7;
        for (p, e) in grid.pred.iter_mut().zip(&grid.exact) {
            *p = e + c;
        }
        let err = l2_relative_error(&grid, None).unwrap();
        // Brute-force oracle: c·sqrt(N) / ||exact||.
        let n = grid.exact.len() as f64;
        let norm = grid.exact.iter().map(|e| e * e).sum::<f64>().sqrt();
        let expect = c * n.sqrt() / norm;
        assert!((err - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn per_band_errors_use_only_their_points() {
        let (problem, part) = kdv_setup();
        let arch = Architecture::new(vec![2, 4, 1]).unwrap();
        let mut grid =
            stitch(&problem, &part, &[(arch.clone(), init_xavier(&arch, 1))], 30, 15).unwrap();
        grid.pred.copy_from_slice(&grid.exact);
        // Corrupt only band 1: band 0's error stays zero.
        for i in 0..grid.len() {
            if grid.subdomain[i] == 1 {
                grid.pred[i] += 5.0;
            }
        }
        assert_eq!(l2_relative_error(&grid, Some(0)).unwrap(), 0.0);
        assert!(l2_relative_error(&grid, Some(1)).unwrap() > 0.0);
    }

    #[test]
    fn discontinuity_of_identical_and_shifted_networks() {
        let arch = Architecture::new(vec![2, 5, 1]).unwrap();
        let params = init_xavier(&arch, 3);
        let probes = vec![(0.0, 0.25), (0.5, 0.5), (1.0, 0.75)];
        let zero =
            interface_discontinuity((&arch, &params), (&arch, &params), &probes).unwrap();
        assert_eq!(zero, 0.0);

        let mut shifted = params.clone();
        let n = shifted.len();
        shifted.values[n - 1] += 2.5; // output bias: u -> u + 2.5
        let jump = interface_discontinuity((&arch, &params), (&arch, &shifted), &probes).unwrap();
        assert!((jump - 2.5).abs() < 1e-12);
    }
}
