//! Training sessions: data assembly, seeding, optimization and results.
//!
//! Every session derives its own random streams from the run seed, the
//! sub-domain index and a purpose tag, so sessions are independent of each
//! other and of execution order — running them serially or from a worker
//! pool produces bitwise-identical results.

use std::cell::RefCell;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{
    discretize_conditions, interface_points, partition, LabeledPoint, Partition, SubDomain,
};
use crate::lbfgs::{minimize_observed, OptTrace, OptimConfig};
use crate::mlp::{init_xavier, Architecture, ParameterVector};
use crate::problems::Problem;
use crate::symmetry::{Composition, SymmetryGroup};
use crate::training::loss::{
    InterfaceCoupling, LossReport, LossWeights, Method, SubdomainData, SubdomainObjective,
    XpinnObjective,
};

/// Per-sub-domain training knobs; sub-domains may differ (heterogeneous
/// networks).
#[derive(Debug, Clone)]
pub struct SubTrainConfig {
    pub arch: Architecture,
    /// Initial/boundary training points sampled from the condition grid.
    pub n_u: usize,
    /// Collocation points.
    pub n_f: usize,
    /// Points per dividing line (interface labels or coupling points).
    pub n_i: usize,
    /// Separate ISC point count; `None` reuses the collocation set.
    pub n_g: Option<usize>,
}

impl SubTrainConfig {
    pub fn new(arch: Architecture, n_u: usize, n_f: usize) -> Self {
        Self { arch, n_u, n_f, n_i: 101, n_g: None }
    }

    fn validate(&self) -> Result<()> {
        if self.n_u == 0 || self.n_f == 0 {
            return Err(Error::Config("n_u and n_f must be at least 1".into()));
        }
        if self.n_i < 2 {
            return Err(Error::Config("n_i must be at least 2 points per interface".into()));
        }
        Ok(())
    }
}

/// Full configuration of one training run.
#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub method: Method,
    /// One entry per partition sub-domain (a single entry for whole-domain
    /// methods).
    pub subdomains: Vec<SubTrainConfig>,
    pub optim: OptimConfig,
    pub weights: LossWeights,
    /// Initial value of the trainable λ (inverse problems).
    pub lambda_init: f64,
    /// Interior labels sampled from the orbit-generated pool.
    pub n_p: usize,
    /// Group step for interior-label generation (additive step, or ratio
    /// > 1 for scaling groups).
    pub ld_epsilon: f64,
    pub ld_k_max: usize,
    /// Which band an inverse run trains on.
    pub target_subdomain: usize,
    /// Condition-grid resolution (also the error-grid resolution).
    pub grid_nx: usize,
    pub grid_nt: usize,
    /// Loss-report sampling stride in iterations.
    pub report_every: usize,
}

impl TrainingConfig {
    pub fn new(method: Method, subdomains: Vec<SubTrainConfig>) -> Self {
        Self {
            method,
            subdomains,
            optim: OptimConfig::default(),
            weights: LossWeights::default(),
            lambda_init: 0.0,
            n_p: 500,
            ld_epsilon: 0.05,
            ld_k_max: 40,
            target_subdomain: 0,
            grid_nx: 400,
            grid_nt: 200,
            report_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.optim.validate()?;
        self.weights.validate()?;
        if self.subdomains.is_empty() {
            return Err(Error::Config("at least one sub-domain config is required".into()));
        }
        for s in &self.subdomains {
            s.validate()?;
        }
        if self.grid_nx < 2 || self.grid_nt < 2 {
            return Err(Error::Config("condition grids need at least 2 points per edge".into()));
        }
        if self.method.is_inverse() && self.n_p == 0 {
            return Err(Error::Config("inverse runs need n_p >= 1 interior labels".into()));
        }
        Ok(())
    }
}

/// Recovered inverse-problem parameter.
#[derive(Debug, Clone, Copy)]
pub struct InverseState {
    pub lambda: f64,
    /// Relative error against the manufactured value λ = 1.
    pub lambda_rel_err: f64,
}

/// A training point exported for plotting / audit.
#[derive(Debug, Clone)]
pub struct ExportPoint {
    pub x: f64,
    pub t: f64,
    pub label: Option<f64>,
    pub kind: &'static str,
    pub subdomain: usize,
}

/// Outcome of one session (one network per trained sub-domain).
#[derive(Debug, Clone)]
pub struct SessionResult {
    pub method: Method,
    /// Band index for single-sub-domain sessions, `None` for joint/whole runs.
    pub subdomain: Option<usize>,
    pub archs: Vec<Architecture>,
    pub params: Vec<ParameterVector>,
    pub trace: OptTrace,
    /// Sampled loss reports: (iteration, report).
    pub reports: Vec<(usize, LossReport)>,
    pub inverse: Option<InverseState>,
    pub points: Vec<ExportPoint>,
}

const PURPOSE_INIT: u64 = 0;
const PURPOSE_CONDITIONS: u64 = 1;
const PURPOSE_COLLOCATION: u64 = 2;
const PURPOSE_ISC: u64 = 3;
const PURPOSE_SLD: u64 = 4;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Independent stream seed for (run seed, sub-domain, purpose).
pub fn derive_seed(master: u64, subdomain: usize, purpose: u64) -> u64 {
    splitmix(master ^ splitmix((subdomain as u64) << 8 | purpose))
}

fn subset_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random subset of `n` pool entries (the whole pool when n >= len),
/// deterministic per seed.
fn sample_subset<T: Clone>(pool: &[T], n: usize, seed: u64) -> Vec<T> {
    if n >= pool.len() {
        return pool.to_vec();
    }
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.shuffle(&mut subset_rng(seed));
    idx.truncate(n);
    idx.sort_unstable();
    idx.into_iter().map(|i| pool[i].clone()).collect()
}

/// Orbit-generated interior labels: every condition point is transported
/// into the domain by repeated group actions (direction chosen so the first
/// step stays inside the rectangle); points landing in `sub` keep their
/// transported label, the rest are discarded.
pub fn generate_interior_labels(
    group: &SymmetryGroup,
    condition_points: &[LabeledPoint],
    eps: f64,
    k_max: usize,
    sub: &SubDomain,
) -> Result<Vec<LabeledPoint>> {
    if !(eps.is_finite()) || eps == 0.0 {
        return Err(Error::Config(format!("invalid orbit step {eps}")));
    }
    let backward = match group.composition() {
        Composition::Additive => -eps,
        Composition::Multiplicative => 1.0 / eps,
    };
    let rect = sub.rect;
    let mut out = Vec::new();
    for seed in condition_points {
        let p0 = (seed.x, seed.t, seed.u);
        let step = [eps, backward].into_iter().find(|&e| {
            group
                .apply(p0, e, 1)
                .map(|(x, t, _)| rect.contains_closure(x, t, 1e-12))
                .unwrap_or(false)
        });
        let Some(step) = step else { continue };
        for k in 1..=k_max {
            let (x, t, u) = group.apply(p0, step, k)?;
            if !rect.contains_closure(x, t, 1e-12) {
                break;
            }
            if sub.contains(x, t) {
                out.push(LabeledPoint { x, t, u, kind: seed.kind });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Config(
            "orbit generation produced no interior labels inside the sub-domain".into(),
        ));
    }
    Ok(out)
}

struct AssembledData {
    data: SubdomainData,
    export: Vec<ExportPoint>,
}

/// Samples all point sets for one sub-domain session.
fn assemble_data(
    problem: &Problem,
    sub: &SubDomain,
    stc: &SubTrainConfig,
    cfg: &TrainingConfig,
    seed: u64,
    with_interface_labels: bool,
    with_isc: bool,
) -> Result<AssembledData> {
    let pool = discretize_conditions(problem, sub, cfg.grid_nx, cfg.grid_nt)?;
    let conditions = sample_subset(&pool, stc.n_u, derive_seed(seed, sub.index, PURPOSE_CONDITIONS));

    let mut interface_labeled = Vec::new();
    if with_interface_labels {
        for c in sub.interface_thresholds() {
            interface_labeled.extend(interface_points(
                problem.group(),
                problem,
                c,
                &sub.rect,
                stc.n_i - 1,
            )?);
        }
    }

    let collocation =
        sub.sample_collocation_lhs(stc.n_f, derive_seed(seed, sub.index, PURPOSE_COLLOCATION))?;
    let isc_points = match (with_isc, stc.n_g) {
        (true, Some(n)) => {
            Some(sub.sample_collocation_lhs(n, derive_seed(seed, sub.index, PURPOSE_ISC))?)
        }
        _ => None,
    };

    let mut export = Vec::new();
    for lp in &conditions {
        export.push(ExportPoint {
            x: lp.x,
            t: lp.t,
            label: Some(lp.u),
            kind: lp.kind.as_str(),
            subdomain: sub.index,
        });
    }
    for lp in &interface_labeled {
        export.push(ExportPoint {
            x: lp.x,
            t: lp.t,
            label: Some(lp.u),
            kind: "interface",
            subdomain: sub.index,
        });
    }
    for &(x, t) in &collocation {
        export.push(ExportPoint { x, t, label: None, kind: "collocation", subdomain: sub.index });
    }
    if let Some(pts) = &isc_points {
        for &(x, t) in pts {
            export.push(ExportPoint { x, t, label: None, kind: "isc", subdomain: sub.index });
        }
    }

    Ok(AssembledData {
        data: SubdomainData {
            conditions,
            interface_labeled,
            interior_labels: Vec::new(),
            collocation,
            isc_points,
        },
        export,
    })
}

type SingleRun = (Vec<f64>, OptTrace, Vec<(usize, LossReport)>);

fn run_single(
    objective: SubdomainObjective,
    init: Vec<f64>,
    cfg: &TrainingConfig,
) -> Result<SingleRun> {
    let obj = RefCell::new(objective);
    let reports = RefCell::new(Vec::new());
    let (best, trace) = minimize_observed(
        |p, g| obj.borrow_mut().eval(p, g),
        &init,
        &cfg.optim,
        |iter, _| {
            if iter % cfg.report_every == 0 {
                reports.borrow_mut().push((iter, obj.borrow().last_report()));
            }
        },
    )?;
    let mut reports = reports.into_inner();
    let final_report = obj.borrow_mut().report_at(&best);
    reports.push((trace.records.len(), final_report));
    Ok((best, trace, reports))
}

/// Trains one sub-domain independently (`pinn`, `sdpinn` or `sdpinn_isc`).
pub fn train_subdomain(
    problem: &Problem,
    part: &Partition,
    sub_idx: usize,
    cfg: &TrainingConfig,
    seed: u64,
) -> Result<SessionResult> {
    cfg.validate()?;
    if !matches!(cfg.method, Method::Pinn | Method::SdPinn | Method::SdPinnIsc) {
        return Err(Error::Config(format!(
            "train_subdomain handles pinn/sdpinn/sdpinn_isc, got {}",
            cfg.method.as_str()
        )));
    }
    let sub = part
        .subdomains
        .get(sub_idx)
        .ok_or_else(|| Error::Config(format!("sub-domain index {sub_idx} out of range")))?;
    let stc = cfg
        .subdomains
        .get(sub_idx)
        .ok_or_else(|| Error::Config(format!("no training config for sub-domain {sub_idx}")))?;

    let assembled = assemble_data(
        problem,
        sub,
        stc,
        cfg,
        seed,
        cfg.method.uses_interface_labels(),
        cfg.method.uses_isc(),
    )?;
    let objective = SubdomainObjective::new(
        problem,
        &stc.arch,
        assembled.data,
        cfg.weights,
        cfg.method.uses_isc(),
        false,
    )?;
    let init = init_xavier(&stc.arch, derive_seed(seed, sub_idx, PURPOSE_INIT));
    let (best, trace, reports) = run_single(objective, init.values, cfg)?;

    Ok(SessionResult {
        method: cfg.method,
        subdomain: Some(sub_idx),
        archs: vec![stc.arch.clone()],
        params: vec![ParameterVector::new(best)],
        trace,
        reports,
        inverse: None,
        points: assembled.export,
    })
}

/// Trains all sub-domain networks jointly with XPINN interface coupling.
pub fn train_xpinn(
    problem: &Problem,
    part: &Partition,
    cfg: &TrainingConfig,
    seed: u64,
) -> Result<SessionResult> {
    cfg.validate()?;
    if cfg.method != Method::Xpinn {
        return Err(Error::Config(format!(
            "train_xpinn requires method xpinn, got {}",
            cfg.method.as_str()
        )));
    }
    let n_subs = part.subdomains.len();
    if cfg.subdomains.len() != n_subs {
        return Err(Error::Config(format!(
            "{} sub-domain configs for a partition with {n_subs} sub-domains",
            cfg.subdomains.len()
        )));
    }

    let mut datas = Vec::with_capacity(n_subs);
    let mut export = Vec::new();
    for (idx, (sub, stc)) in part.subdomains.iter().zip(&cfg.subdomains).enumerate() {
        let mut assembled = assemble_data(problem, sub, stc, cfg, seed, false, false)?;
        debug_assert_eq!(idx, sub.index);
        datas.push(assembled.data);
        export.append(&mut assembled.export);
    }
    // One coupling per dividing line between bands i and i+1; the points are
    // the orbit points, labels dropped.
    let mut couplings = Vec::new();
    for (i, &c) in part.thresholds.iter().enumerate() {
        let pts = interface_points(problem.group(), problem, c, &part.rect, cfg.subdomains[i].n_i - 1)?;
        for lp in &pts {
            export.push(ExportPoint {
                x: lp.x,
                t: lp.t,
                label: None,
                kind: "interface",
                subdomain: i,
            });
        }
        couplings.push(InterfaceCoupling {
            left: i,
            right: i + 1,
            points: pts.into_iter().map(|lp| (lp.x, lp.t)).collect(),
        });
    }

    let archs: Vec<Architecture> = cfg.subdomains.iter().map(|s| s.arch.clone()).collect();
    let objective = XpinnObjective::new(problem, &archs, datas, couplings, cfg.weights)?;

    let mut init = Vec::with_capacity(objective.param_len());
    for (idx, stc) in cfg.subdomains.iter().enumerate() {
        init.extend(init_xavier(&stc.arch, derive_seed(seed, idx, PURPOSE_INIT)).values);
    }

    let obj = RefCell::new(objective);
    let reports = RefCell::new(Vec::new());
    let (best, trace) = minimize_observed(
        |p, g| obj.borrow_mut().eval(p, g),
        &init,
        &cfg.optim,
        |iter, _| {
            if iter % cfg.report_every == 0 {
                reports.borrow_mut().push((iter, obj.borrow().last_report()));
            }
        },
    )?;
    let mut reports = reports.into_inner();
    let final_report = obj.borrow_mut().report_at(&best);
    reports.push((trace.records.len(), final_report));

    let obj = obj.into_inner();
    let params = (0..n_subs)
        .map(|i| ParameterVector::new(obj.net_params(&best, i).to_vec()))
        .collect();

    Ok(SessionResult {
        method: Method::Xpinn,
        subdomain: None,
        archs,
        params,
        trace,
        reports,
        inverse: None,
        points: export,
    })
}

/// Recovers λ (and the solution) from orbit-generated interior labels.
///
/// `inverse` trains the target sub-domain with its exactly labeled interface;
/// `inverse_pinn` is the baseline trained on the whole rectangle with the
/// identical label set.
pub fn train_inverse(
    problem: &Problem,
    part: &Partition,
    cfg: &TrainingConfig,
    seed: u64,
) -> Result<SessionResult> {
    cfg.validate()?;
    if !cfg.method.is_inverse() {
        return Err(Error::Config(format!(
            "train_inverse requires an inverse method, got {}",
            cfg.method.as_str()
        )));
    }
    let target = cfg.target_subdomain;
    let target_sub = part
        .subdomains
        .get(target)
        .ok_or_else(|| Error::Config(format!("target sub-domain {target} out of range")))?;

    // Interior labels: orbits of the full condition grid, clipped to the
    // target band, then sampled down to n_p.
    let whole = partition(part.rect, problem.group(), &[])?;
    let pool = discretize_conditions(problem, &whole.subdomains[0], cfg.grid_nx, cfg.grid_nt)?;
    let all_labels =
        generate_interior_labels(problem.group(), &pool, cfg.ld_epsilon, cfg.ld_k_max, target_sub)?;
    let interior_labels =
        sample_subset(&all_labels, cfg.n_p, derive_seed(seed, target, PURPOSE_SLD));

    let sdpinn_style = cfg.method == Method::Inverse;
    let (train_sub, stc) = if sdpinn_style {
        (
            target_sub,
            cfg.subdomains
                .get(target)
                .ok_or_else(|| Error::Config(format!("no training config for sub-domain {target}")))?,
        )
    } else {
        (
            &whole.subdomains[0],
            cfg.subdomains
                .first()
                .ok_or_else(|| Error::Config("inverse_pinn needs one sub-domain config".into()))?,
        )
    };

    let mut assembled =
        assemble_data(problem, train_sub, stc, cfg, seed, sdpinn_style, false)?;
    assembled.data.interior_labels = interior_labels;
    for lp in &assembled.data.interior_labels {
        assembled.export.push(ExportPoint {
            x: lp.x,
            t: lp.t,
            label: Some(lp.u),
            kind: "interior_label",
            subdomain: target,
        });
    }

    let objective =
        SubdomainObjective::new(problem, &stc.arch, assembled.data, cfg.weights, false, true)?;
    let mut init = init_xavier(&stc.arch, derive_seed(seed, train_sub.index, PURPOSE_INIT)).values;
    init.push(cfg.lambda_init);
    let (best, trace, reports) = run_single(objective, init, cfg)?;

    let lambda = *best.last().unwrap();
    let net = ParameterVector::new(best[..best.len() - 1].to_vec());
    Ok(SessionResult {
        method: cfg.method,
        subdomain: sdpinn_style.then_some(target),
        archs: vec![stc.arch.clone()],
        params: vec![net],
        trace,
        reports,
        inverse: Some(InverseState { lambda, lambda_rel_err: (lambda - 1.0).abs() }),
        points: assembled.export,
    })
}
