//! Method-specific loss objectives with reverse-accumulated gradients.

use crate::error::{Error, Result};
use crate::geometry::LabeledPoint;
use crate::jet::{Jet, JetAdjoint, Tape};
use crate::mlp::Architecture;
use crate::problems::Problem;

/// Per-term loss weights; all default to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub w_u: f64,
    pub w_f: f64,
    pub w_g: f64,
    pub w_i: f64,
    pub w_p: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { w_u: 1.0, w_f: 1.0, w_g: 1.0, w_i: 1.0, w_p: 1.0 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("w_u", self.w_u),
            ("w_f", self.w_f),
            ("w_g", self.w_g),
            ("w_i", self.w_i),
            ("w_p", self.w_p),
        ] {
            if !(w >= 0.0) {
                return Err(Error::Config(format!("loss weight {name} must be nonnegative, got {w}")));
            }
        }
        Ok(())
    }
}

/// Unweighted per-term mean squared errors at one evaluation; `total` is the
/// weighted sum of the present terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossReport {
    pub mse_u: Option<f64>,
    pub mse_f: Option<f64>,
    pub mse_g: Option<f64>,
    pub mse_r: Option<f64>,
    pub mse_u_avg: Option<f64>,
    pub mse_p: Option<f64>,
    pub total: f64,
}

impl LossReport {
    /// Recomputes the weighted sum of present terms (consistency checks).
    pub fn weighted_total(&self, w: &LossWeights) -> f64 {
        self.mse_u.map_or(0.0, |v| w.w_u * v)
            + self.mse_f.map_or(0.0, |v| w.w_f * v)
            + self.mse_g.map_or(0.0, |v| w.w_g * v)
            + self.mse_r.map_or(0.0, |v| w.w_i * v)
            + self.mse_u_avg.map_or(0.0, |v| w.w_i * v)
            + self.mse_p.map_or(0.0, |v| w.w_p * v)
    }
}

/// Training method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Pinn,
    Xpinn,
    SdPinn,
    SdPinnIsc,
    /// Inverse problem trained on one sub-domain (sdPINN style).
    Inverse,
    /// Inverse-problem baseline trained on the whole rectangle.
    InversePinn,
}

impl Method {
    pub fn parse(s: &str) -> Result<Method> {
        Ok(match s {
            "pinn" => Method::Pinn,
            "xpinn" => Method::Xpinn,
            "sdpinn" => Method::SdPinn,
            "sdpinn_isc" => Method::SdPinnIsc,
            "inverse" => Method::Inverse,
            "inverse_pinn" => Method::InversePinn,
            other => {
                return Err(Error::Config(format!(
                    "unknown method '{other}' (expected pinn | xpinn | sdpinn | sdpinn_isc | inverse | inverse_pinn)"
                )))
            }
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Pinn => "pinn",
            Method::Xpinn => "xpinn",
            Method::SdPinn => "sdpinn",
            Method::SdPinnIsc => "sdpinn_isc",
            Method::Inverse => "inverse",
            Method::InversePinn => "inverse_pinn",
        }
    }

    pub fn uses_interface_labels(&self) -> bool {
        matches!(self, Method::SdPinn | Method::SdPinnIsc | Method::Inverse)
    }

    pub fn uses_isc(&self) -> bool {
        matches!(self, Method::SdPinnIsc)
    }

    pub fn is_inverse(&self) -> bool {
        matches!(self, Method::Inverse | Method::InversePinn)
    }
}

/// Point sets feeding one sub-domain's loss.
#[derive(Debug, Clone, Default)]
pub struct SubdomainData {
    /// Sampled initial/boundary training points with exact labels.
    pub conditions: Vec<LabeledPoint>,
    /// Orbit-generated interface points with exact labels (sdPINN family).
    pub interface_labeled: Vec<LabeledPoint>,
    /// Orbit-generated interior labels S_ld (inverse problems).
    pub interior_labels: Vec<LabeledPoint>,
    /// Collocation points for the PDE residual.
    pub collocation: Vec<(f64, f64)>,
    /// Separate points for the ISC penalty; `None` reuses the collocation set.
    pub isc_points: Option<Vec<(f64, f64)>>,
}

/// Loss `w_u·MSE_u + w_f·MSE_f [+ w_g·MSE_g] [+ w_p·MSE_p]` for one network,
/// differentiable in the flat parameter vector (plus a trailing λ for
/// inverse problems).
pub struct SubdomainObjective {
    problem: Problem,
    arch: Architecture,
    weights: LossWeights,
    use_isc: bool,
    inverse: bool,
    points: Vec<(f64, f64)>,
    /// Exact labels for `points[..n_labeled]` (conditions then interfaces).
    labels: Vec<f64>,
    /// Labels for the S_ld range.
    sld_labels: Vec<f64>,
    /// Forcing at the collocation (and ISC, if separate) points.
    mu: Vec<f64>,
    n_cond: usize,
    n_iface: usize,
    n_sld: usize,
    n_colloc: usize,
    n_isc: usize,
    tape: Tape,
    jets: Vec<Jet>,
    adjoints: Vec<JetAdjoint>,
    last_report: LossReport,
    report_scratch: Vec<f64>,
}

impl std::fmt::Debug for SubdomainObjective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubdomainObjective")
            .field("problem", &self.problem.name())
            .field("n_cond", &self.n_cond)
            .field("n_iface", &self.n_iface)
            .field("n_sld", &self.n_sld)
            .field("n_colloc", &self.n_colloc)
            .field("use_isc", &self.use_isc)
            .field("inverse", &self.inverse)
            .finish()
    }
}

impl SubdomainObjective {
    pub fn new(
        problem: &Problem,
        arch: &Architecture,
        data: SubdomainData,
        weights: LossWeights,
        use_isc: bool,
        inverse: bool,
    ) -> Result<Self> {
        weights.validate()?;
        if data.collocation.is_empty() {
            return Err(Error::Config("MSE_f requires collocation points".into()));
        }
        if data.conditions.is_empty() && data.interface_labeled.is_empty() {
            return Err(Error::Config(
                "MSE_u requires initial/boundary or interface points".into(),
            ));
        }
        if inverse && data.interior_labels.is_empty() {
            return Err(Error::Config("MSE_p requires interior labels S_ld".into()));
        }
        if inverse && !problem.supports_inverse() {
            return Err(Error::Config(format!(
                "problem '{}' has no λ-dependent term to recover",
                problem.name()
            )));
        }

        let mut points = Vec::new();
        let mut labels = Vec::new();
        for lp in data.conditions.iter().chain(&data.interface_labeled) {
            points.push((lp.x, lp.t));
            labels.push(lp.u);
        }
        let sld_labels: Vec<f64> = data.interior_labels.iter().map(|lp| lp.u).collect();
        points.extend(data.interior_labels.iter().map(|lp| (lp.x, lp.t)));
        points.extend(&data.collocation);
        let isc_extra = match &data.isc_points {
            Some(p) if use_isc => p.clone(),
            _ => Vec::new(),
        };
        points.extend(&isc_extra);

        let mut mu = Vec::with_capacity(data.collocation.len() + isc_extra.len());
        for &(x, t) in &data.collocation {
            mu.push(problem.forcing(x, t)?);
        }

        let n_isc = if use_isc {
            if isc_extra.is_empty() { data.collocation.len() } else { isc_extra.len() }
        } else {
            0
        };

        Ok(Self {
            problem: problem.clone(),
            arch: arch.clone(),
            weights,
            use_isc,
            inverse,
            n_cond: data.conditions.len(),
            n_iface: data.interface_labeled.len(),
            n_sld: data.interior_labels.len(),
            n_colloc: data.collocation.len(),
            n_isc,
            points,
            labels,
            sld_labels,
            mu,
            tape: Tape::new(),
            jets: Vec::new(),
            adjoints: Vec::new(),
            last_report: LossReport::default(),
            report_scratch: Vec::new(),
        })
    }

    /// Expected parameter-vector length (network plus λ for inverse runs).
    pub fn param_len(&self) -> usize {
        self.arch.param_count() + self.inverse as usize
    }

    pub fn last_report(&self) -> LossReport {
        self.last_report
    }

    /// Loss and gradient; `grad` is overwritten and must have
    /// [`Self::param_len`] entries.
    pub fn eval(&mut self, params: &[f64], grad: &mut [f64]) -> f64 {
        let n_net = self.arch.param_count();
        assert_eq!(params.len(), self.param_len(), "parameter length mismatch");
        assert_eq!(grad.len(), params.len());
        let lambda = if self.inverse { params[n_net] } else { 1.0 };
        let net = &params[..n_net];

        self.tape
            .forward(net, &self.arch, &self.points, &mut self.jets)
            .expect("objective points and shapes are validated at construction");
        self.adjoints.clear();
        self.adjoints.resize(self.points.len(), JetAdjoint::ZERO);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let w = self.weights;

        // MSE_u over conditions + labeled interfaces.
        let n_u = self.n_cond + self.n_iface;
        let mse_u = if n_u > 0 {
            let mut sum = 0.0;
            for i in 0..n_u {
                let e = self.jets[i].u - self.labels[i];
                sum += e * e;
                self.adjoints[i].du += 2.0 * w.w_u * e / n_u as f64;
            }
            Some(sum / n_u as f64)
        } else {
            None
        };

        // MSE_p over interior labels.
        let sld0 = n_u;
        let mse_p = if self.n_sld > 0 {
            let mut sum = 0.0;
            for k in 0..self.n_sld {
                let e = self.jets[sld0 + k].u - self.sld_labels[k];
                sum += e * e;
                self.adjoints[sld0 + k].du += 2.0 * w.w_p * e / self.n_sld as f64;
            }
            Some(sum / self.n_sld as f64)
        } else {
            None
        };

        // MSE_f over collocation points.
        let col0 = sld0 + self.n_sld;
        let mut dlambda = 0.0;
        let mut sum_f = 0.0;
        for k in 0..self.n_colloc {
            let i = col0 + k;
            let jet = self.jets[i];
            let (adj, dlam) = self.problem.residual_adjoint(&jet, lambda);
            let r = residual_with_mu(&self.problem, &jet, self.mu[k], lambda);
            sum_f += r * r;
            let s = 2.0 * w.w_f * r / self.n_colloc as f64;
            add_scaled(&mut self.adjoints[i], &adj, s);
            dlambda += s * dlam;
        }
        let mse_f = Some(sum_f / self.n_colloc as f64);

        // MSE_g over the ISC point set (collocation by default).
        let isc0 = if self.points.len() > col0 + self.n_colloc {
            col0 + self.n_colloc
        } else {
            col0
        };
        let mse_g = if self.use_isc && self.n_isc > 0 {
            let group = self.problem.group().clone();
            let mut sum = 0.0;
            for k in 0..self.n_isc {
                let i = isc0 + k;
                let (x, t) = self.points[i];
                let jet = self.jets[i];
                let g = group.isc_residual(&jet, x, t);
                sum += g * g;
                let s = 2.0 * w.w_g * g / self.n_isc as f64;
                add_scaled(&mut self.adjoints[i], &group.isc_adjoint(&jet, x, t), s);
            }
            Some(sum / self.n_isc as f64)
        } else {
            None
        };

        self.tape.backward(net, &self.arch, &self.adjoints, &mut grad[..n_net]);
        if self.inverse {
            grad[n_net] = dlambda;
        }

        let report = LossReport {
            mse_u,
            mse_f,
            mse_g,
            mse_r: None,
            mse_u_avg: None,
            mse_p,
            total: 0.0,
        };
        let total = report.weighted_total(&w);
        self.last_report = LossReport { total, ..report };
        total
    }

    /// Loss report at `params` without touching caller gradient state.
    pub fn report_at(&mut self, params: &[f64]) -> LossReport {
        let n = self.param_len();
        self.report_scratch.resize(n, 0.0);
        let mut scratch = std::mem::take(&mut self.report_scratch);
        self.eval(params, &mut scratch);
        self.report_scratch = scratch;
        self.last_report
    }
}

fn residual_with_mu(problem: &Problem, jet: &Jet, mu: f64, lambda: f64) -> f64 {
    use crate::problems::ProblemKind;
    match problem.kind() {
        ProblemKind::Kdv => jet.u_t + lambda * jet.u * jet.u_x + jet.u_xxx - mu,
        ProblemKind::Nvf => {
            jet.u_t + jet.u * jet.u_x
                - 3.0 * jet.u * jet.u * jet.u_x * jet.u_x
                - jet.u * jet.u * jet.u * jet.u_xx
                - mu
        }
    }
}

fn add_scaled(acc: &mut JetAdjoint, adj: &JetAdjoint, s: f64) {
    acc.du += s * adj.du;
    acc.du_t += s * adj.du_t;
    acc.du_x += s * adj.du_x;
    acc.du_xx += s * adj.du_xx;
    acc.du_xxx += s * adj.du_xxx;
}

/// Unlabeled interface shared by two neighboring sub-domains.
#[derive(Debug, Clone)]
pub struct InterfaceCoupling {
    pub left: usize,
    pub right: usize,
    pub points: Vec<(f64, f64)>,
}

struct XpinnNet {
    arch: Architecture,
    param_offset: usize,
    /// conditions ++ collocation ++ coupling points (in coupling order).
    points: Vec<(f64, f64)>,
    labels: Vec<f64>,
    mu_colloc: Vec<f64>,
    n_cond: usize,
    n_colloc: usize,
    /// Start offset of each incident coupling's points within `points`.
    coupling_offsets: Vec<(usize, usize)>,
    tape: Tape,
    jets: Vec<Jet>,
    adjoints: Vec<JetAdjoint>,
}

/// Joint objective over all sub-domain networks with interface coupling.
///
/// The parameter vector is the concatenation of the per-sub-domain networks.
/// Each coupling contributes the residual-continuity term to both adjacent
/// losses and one average-value term per side, so in the total it appears
/// with weight `w_i·(2·MSE_R + MSE_u_avg,left + MSE_u_avg,right)`; the
/// report's `mse_r`/`mse_u_avg` fields carry these double-counted sums so the
/// weighted-total identity holds.
pub struct XpinnObjective {
    problem: Problem,
    weights: LossWeights,
    nets: Vec<XpinnNet>,
    couplings: Vec<InterfaceCoupling>,
    mu_couplings: Vec<Vec<f64>>,
    n_params: usize,
    last_report: LossReport,
    report_scratch: Vec<f64>,
}

impl XpinnObjective {
    pub fn new(
        problem: &Problem,
        archs: &[Architecture],
        data: Vec<SubdomainData>,
        couplings: Vec<InterfaceCoupling>,
        weights: LossWeights,
    ) -> Result<Self> {
        weights.validate()?;
        if archs.len() != data.len() {
            return Err(Error::Config(format!(
                "{} architectures for {} sub-domain data sets",
                archs.len(),
                data.len()
            )));
        }
        for c in &couplings {
            if c.left >= archs.len() || c.right >= archs.len() || c.left == c.right {
                return Err(Error::Config(format!(
                    "coupling references invalid sub-domains {} and {}",
                    c.left, c.right
                )));
            }
            if c.points.is_empty() {
                return Err(Error::Config(format!(
                    "coupling between sub-domains {} and {} has no interface points",
                    c.left, c.right
                )));
            }
        }

        let mut nets = Vec::with_capacity(archs.len());
        let mut param_offset = 0;
        for (idx, (arch, d)) in archs.iter().zip(&data).enumerate() {
            if d.collocation.is_empty() {
                return Err(Error::Config(format!(
                    "MSE_f requires collocation points in sub-domain {idx}"
                )));
            }
            let mut points: Vec<(f64, f64)> = Vec::new();
            let mut labels = Vec::new();
            for lp in &d.conditions {
                points.push((lp.x, lp.t));
                labels.push(lp.u);
            }
            points.extend(&d.collocation);
            let mut mu_colloc = Vec::with_capacity(d.collocation.len());
            for &(x, t) in &d.collocation {
                mu_colloc.push(problem.forcing(x, t)?);
            }
            let mut coupling_offsets = Vec::new();
            for (ci, c) in couplings.iter().enumerate() {
                if c.left == idx || c.right == idx {
                    coupling_offsets.push((ci, points.len()));
                    points.extend(&c.points);
                }
            }
            nets.push(XpinnNet {
                arch: arch.clone(),
                param_offset,
                points,
                labels,
                mu_colloc,
                n_cond: d.conditions.len(),
                n_colloc: d.collocation.len(),
                coupling_offsets,
                tape: Tape::new(),
                jets: Vec::new(),
                adjoints: Vec::new(),
            });
            param_offset += arch.param_count();
        }

        let mut mu_couplings = Vec::with_capacity(couplings.len());
        for c in &couplings {
            let mut mu = Vec::with_capacity(c.points.len());
            for &(x, t) in &c.points {
                mu.push(problem.forcing(x, t)?);
            }
            mu_couplings.push(mu);
        }

        Ok(Self {
            problem: problem.clone(),
            weights,
            nets,
            couplings,
            mu_couplings,
            n_params: param_offset,
            last_report: LossReport::default(),
            report_scratch: Vec::new(),
        })
    }

    pub fn param_len(&self) -> usize {
        self.n_params
    }

    pub fn last_report(&self) -> LossReport {
        self.last_report
    }

    /// Parameter slice of one sub-domain network within the joint vector.
    pub fn net_params<'a>(&self, params: &'a [f64], idx: usize) -> &'a [f64] {
        let net = &self.nets[idx];
        &params[net.param_offset..net.param_offset + net.arch.param_count()]
    }

    fn coupling_slot(&self, ci: usize, sub: usize) -> usize {
        self.nets[sub]
            .coupling_offsets
            .iter()
            .find(|(c, _)| *c == ci)
            .map(|(_, off)| *off)
            .expect("coupling registered for this sub-domain")
    }

    pub fn eval(&mut self, params: &[f64], grad: &mut [f64]) -> f64 {
        assert_eq!(params.len(), self.n_params, "parameter length mismatch");
        assert_eq!(grad.len(), params.len());
        grad.iter_mut().for_each(|g| *g = 0.0);
        let w = self.weights;

        let mut sum_mse_u = 0.0;
        let mut any_u = false;
        let mut sum_mse_f = 0.0;
        for net in &mut self.nets {
            let p = &params[net.param_offset..net.param_offset + net.arch.param_count()];
            net.tape
                .forward(p, &net.arch, &net.points, &mut net.jets)
                .expect("xpinn points and shapes are validated at construction");
            net.adjoints.clear();
            net.adjoints.resize(net.points.len(), JetAdjoint::ZERO);

            if net.n_cond > 0 {
                any_u = true;
                let mut sum = 0.0;
                for i in 0..net.n_cond {
                    let e = net.jets[i].u - net.labels[i];
                    sum += e * e;
                    net.adjoints[i].du += 2.0 * w.w_u * e / net.n_cond as f64;
                }
                sum_mse_u += sum / net.n_cond as f64;
            }
            let col0 = net.n_cond;
            let mut sum = 0.0;
            for k in 0..net.n_colloc {
                let i = col0 + k;
                let jet = net.jets[i];
                let r = residual_with_mu(&self.problem, &jet, net.mu_colloc[k], 1.0);
                sum += r * r;
                let (adj, _) = self.problem.residual_adjoint(&jet, 1.0);
                add_scaled(&mut net.adjoints[i], &adj, 2.0 * w.w_f * r / net.n_colloc as f64);
            }
            sum_mse_f += sum / net.n_colloc as f64;
        }

        // Interface terms. Residual continuity enters the loss of both
        // adjacent sub-domains; each side also penalizes its deviation from
        // the interface average (u_p - (u_p + u_q)/2 = (u_p - u_q)/2).
        let mut sum_mse_r = 0.0;
        let mut sum_mse_avg = 0.0;
        for (ci, c) in self.couplings.iter().enumerate() {
            let n = c.points.len() as f64;
            let off_l = self.coupling_slot(ci, c.left);
            let off_r = self.coupling_slot(ci, c.right);
            let mut sum_r = 0.0;
            let mut sum_avg = 0.0;
            for (k, _) in c.points.iter().enumerate() {
                let mu = self.mu_couplings[ci][k];
                let jet_l = self.nets[c.left].jets[off_l + k];
                let jet_r = self.nets[c.right].jets[off_r + k];
                let f_l = residual_with_mu(&self.problem, &jet_l, mu, 1.0);
                let f_r = residual_with_mu(&self.problem, &jet_r, mu, 1.0);
                let df = f_l - f_r;
                sum_r += df * df;
                // d(2·w_i·mean(df²)) / df_l = 4·w_i·df / n.
                let s = 4.0 * w.w_i * df / n;
                let (adj_l, _) = self.problem.residual_adjoint(&jet_l, 1.0);
                let (adj_r, _) = self.problem.residual_adjoint(&jet_r, 1.0);
                add_scaled(&mut self.nets[c.left].adjoints[off_l + k], &adj_l, s);
                add_scaled(&mut self.nets[c.right].adjoints[off_r + k], &adj_r, -s);

                let cavg = 0.5 * (jet_l.u - jet_r.u);
                sum_avg += 2.0 * cavg * cavg;
                // d(2·w_i·mean(c²)) / du_l = 2·w_i·c / n (and -c for u_r).
                self.nets[c.left].adjoints[off_l + k].du += 2.0 * w.w_i * cavg / n;
                self.nets[c.right].adjoints[off_r + k].du -= 2.0 * w.w_i * cavg / n;
            }
            // Both sides count the same MSE_R once each.
            sum_mse_r += 2.0 * sum_r / n;
            sum_mse_avg += sum_avg / n;
        }

        for net in &mut self.nets {
            let p = &params[net.param_offset..net.param_offset + net.arch.param_count()];
            let g = &mut grad[net.param_offset..net.param_offset + net.arch.param_count()];
            net.tape.backward(p, &net.arch, &net.adjoints, g);
        }

        let report = LossReport {
            mse_u: any_u.then_some(sum_mse_u),
            mse_f: Some(sum_mse_f),
            mse_g: None,
            mse_r: (!self.couplings.is_empty()).then_some(sum_mse_r),
            mse_u_avg: (!self.couplings.is_empty()).then_some(sum_mse_avg),
            mse_p: None,
            total: 0.0,
        };
        let total = report.weighted_total(&w);
        self.last_report = LossReport { total, ..report };
        total
    }

    /// Loss report at `params` without touching caller gradient state.
    pub fn report_at(&mut self, params: &[f64]) -> LossReport {
        self.report_scratch.resize(self.n_params, 0.0);
        let mut scratch = std::mem::take(&mut self.report_scratch);
        self.eval(params, &mut scratch);
        self.report_scratch = scratch;
        self.last_report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SegmentKind;
    use crate::mlp::{init_xavier, ParameterVector};

    fn labeled(x: f64, t: f64, u: f64) -> LabeledPoint {
        LabeledPoint { x, t, u, kind: SegmentKind::Initial }
    }

    /// Network with all weights zero and output bias `c`: u ≡ c.
    fn constant_net(arch: &Architecture, c: f64) -> ParameterVector {
        let mut p = ParameterVector::zeros(arch.param_count());
        let n = p.len();
        p.values[n - 1] = c;
        p
    }

    fn small_arch() -> Architecture {
        Architecture::new(vec![2, 6, 1]).unwrap()
    }

    #[test]
    fn perfect_condition_fit_gives_zero_mse_u() {
        let problem = Problem::kdv(5.0);
        let arch = small_arch();
        let params = constant_net(&arch, 1.5);
        let data = SubdomainData {
            conditions: vec![labeled(0.0, 0.0, 1.5), labeled(0.5, 0.0, 1.5)],
            collocation: vec![(0.1, 0.2)],
            ..Default::default()
        };
        let mut obj =
            SubdomainObjective::new(&problem, &arch, data, LossWeights::default(), false, false)
                .unwrap();
        let mut grad = vec![0.0; obj.param_len()];
        obj.eval(params.as_slice(), &mut grad);
        assert_eq!(obj.last_report().mse_u, Some(0.0));
    }

    #[test]
    fn total_is_the_weighted_sum_of_reported_terms() {
        let problem = Problem::kdv(20.0);
        let arch = small_arch();
        let params = init_xavier(&arch, 3);
        let weights = LossWeights { w_u: 2.0, w_f: 0.5, w_g: 3.0, w_i: 1.0, w_p: 0.25 };
        let data = SubdomainData {
            conditions: vec![labeled(-0.5, 0.0, 2.0)],
            interface_labeled: vec![labeled(0.0, 0.25, -1.0)],
            interior_labels: vec![labeled(0.2, 0.1, 0.7)],
            collocation: vec![(0.3, 0.4), (-0.2, 0.8)],
            isc_points: None,
        };
        let mut obj = SubdomainObjective::new(&problem, &arch, data, weights, true, true).unwrap();
        let mut p = params.values.clone();
        p.push(0.3); // λ
        let mut grad = vec![0.0; obj.param_len()];
        let total = obj.eval(&p, &mut grad);
        let report = obj.last_report();
        assert!((total - report.weighted_total(&weights)).abs() < 1e-14);
        assert!(report.mse_u.is_some() && report.mse_f.is_some());
        assert!(report.mse_g.is_some() && report.mse_p.is_some());
    }

    #[test]
    fn sdpinn_without_interfaces_reduces_to_pinn_term_by_term() {
        let problem = Problem::kdv(20.0);
        let arch = small_arch();
        let params = init_xavier(&arch, 11);
        let data = SubdomainData {
            conditions: vec![labeled(-0.5, 0.0, 2.0), labeled(0.75, 0.0, -3.0)],
            collocation: vec![(0.3, 0.4), (-0.2, 0.8), (0.0, 0.1)],
            ..Default::default()
        };
        let mk = |d: SubdomainData| {
            SubdomainObjective::new(&problem, &arch, d, LossWeights::default(), false, false)
                .unwrap()
        };
        let mut pinn = mk(data.clone());
        let mut sdpinn = mk(data);
        let mut g1 = vec![0.0; pinn.param_len()];
        let mut g2 = vec![0.0; sdpinn.param_len()];
        let l1 = pinn.eval(params.as_slice(), &mut g1);
        let l2 = sdpinn.eval(params.as_slice(), &mut g2);
        assert_eq!(l1, l2);
        assert_eq!(pinn.last_report(), sdpinn.last_report());
        assert_eq!(g1, g2);
    }

    #[test]
    fn fixed_lambda_one_reproduces_the_forward_residual_loss() {
        let problem = Problem::kdv(20.0);
        let arch = small_arch();
        let params = init_xavier(&arch, 5);
        let base = SubdomainData {
            conditions: vec![labeled(-0.5, 0.0, 2.0)],
            collocation: vec![(0.3, 0.4), (-0.2, 0.8)],
            ..Default::default()
        };
        let mut fwd = SubdomainObjective::new(
            &problem,
            &arch,
            base.clone(),
            LossWeights::default(),
            false,
            false,
        )
        .unwrap();
        let inv_data = SubdomainData {
            interior_labels: vec![labeled(0.2, 0.1, 0.7)],
            ..base
        };
        let mut inv =
            SubdomainObjective::new(&problem, &arch, inv_data, LossWeights::default(), false, true)
                .unwrap();
        let mut g = vec![0.0; fwd.param_len()];
        fwd.eval(params.as_slice(), &mut g);
        let mut p = params.values.clone();
        p.push(1.0);
        let mut g2 = vec![0.0; inv.param_len()];
        inv.eval(&p, &mut g2);
        assert_eq!(fwd.last_report().mse_f, inv.last_report().mse_f);
    }

    #[test]
    fn xpinn_interface_average_term_from_constant_networks() {
        // u_left ≡ 1, u_right ≡ 3: the deviation from the average is ±1 at
        // each interface point, so each side contributes mean 1 and the
        // double-counted report shows 2. Constant networks share identical
        // residuals, so MSE_R = 0.
        let problem = Problem::kdv(5.0);
        let arch = small_arch();
        let data = vec![
            SubdomainData {
                conditions: vec![labeled(-0.5, 0.0, 1.0)],
                collocation: vec![(0.1, 0.1)],
                ..Default::default()
            },
            SubdomainData {
                conditions: vec![labeled(0.5, 0.0, 3.0)],
                collocation: vec![(-0.5, 0.5)],
                ..Default::default()
            },
        ];
        let couplings = vec![InterfaceCoupling {
            left: 0,
            right: 1,
            points: vec![(0.0, 0.25)],
        }];
        let mut obj = XpinnObjective::new(
            &problem,
            &[arch.clone(), arch.clone()],
            data,
            couplings,
            LossWeights::default(),
        )
        .unwrap();
        let mut params = constant_net(&arch, 1.0).values;
        params.extend(constant_net(&arch, 3.0).values);
        let mut grad = vec![0.0; obj.param_len()];
        obj.eval(&params, &mut grad);
        let report = obj.last_report();
        assert!((report.mse_u_avg.unwrap() - 2.0).abs() < 1e-14);
        assert!(report.mse_r.unwrap().abs() < 1e-20);
    }

    #[test]
    fn xpinn_interface_terms_are_symmetric_under_side_swap() {
        let problem = Problem::kdv(20.0);
        let arch = small_arch();
        let mk_data = || {
            vec![
                SubdomainData {
                    conditions: vec![labeled(-0.5, 0.0, 2.0)],
                    collocation: vec![(0.1, 0.1), (0.4, 0.2)],
                    ..Default::default()
                },
                SubdomainData {
                    conditions: vec![labeled(0.5, 0.0, 1.0)],
                    collocation: vec![(-0.5, 0.5)],
                    ..Default::default()
                },
            ]
        };
        let pts = vec![(0.0, 0.25), (0.5, 0.5)];
        let mut fwd = XpinnObjective::new(
            &problem,
            &[arch.clone(), arch.clone()],
            mk_data(),
            vec![InterfaceCoupling { left: 0, right: 1, points: pts.clone() }],
            LossWeights::default(),
        )
        .unwrap();
        let mut swapped = XpinnObjective::new(
            &problem,
            &[arch.clone(), arch.clone()],
            mk_data(),
            vec![InterfaceCoupling { left: 1, right: 0, points: pts }],
            LossWeights::default(),
        )
        .unwrap();
        let mut params = init_xavier(&arch, 1).values;
        params.extend(init_xavier(&arch, 2).values);
        let mut g1 = vec![0.0; fwd.param_len()];
        let mut g2 = vec![0.0; swapped.param_len()];
        let l1 = fwd.eval(&params, &mut g1);
        let l2 = swapped.eval(&params, &mut g2);
        assert!((l1 - l2).abs() <= 1e-14 * l1.abs());
        let (r1, r2) = (fwd.last_report(), swapped.last_report());
        assert!((r1.mse_r.unwrap() - r2.mse_r.unwrap()).abs() < 1e-14 * r1.mse_r.unwrap().max(1.0));
        assert!(
            (r1.mse_u_avg.unwrap() - r2.mse_u_avg.unwrap()).abs()
                < 1e-14 * r1.mse_u_avg.unwrap().max(1.0)
        );
    }

    #[test]
    fn xpinn_single_subdomain_reduces_to_pinn() {
        let problem = Problem::kdv(20.0);
        let arch = small_arch();
        let params = init_xavier(&arch, 9);
        let data = SubdomainData {
            conditions: vec![labeled(-0.5, 0.0, 2.0), labeled(1.0, 0.5, 0.0)],
            collocation: vec![(0.3, 0.4), (-0.2, 0.8)],
            ..Default::default()
        };
        let mut pinn = SubdomainObjective::new(
            &problem,
            &arch,
            data.clone(),
            LossWeights::default(),
            false,
            false,
        )
        .unwrap();
        let mut xpinn = XpinnObjective::new(
            &problem,
            std::slice::from_ref(&arch),
            vec![data],
            Vec::new(),
            LossWeights::default(),
        )
        .unwrap();
        let mut g1 = vec![0.0; pinn.param_len()];
        let mut g2 = vec![0.0; xpinn.param_len()];
        let l1 = pinn.eval(params.as_slice(), &mut g1);
        let l2 = xpinn.eval(params.as_slice(), &mut g2);
        assert_eq!(l1, l2);
        assert_eq!(g1, g2);
    }

    #[test]
    fn missing_required_data_errors_name_the_term() {
        let problem = Problem::kdv(5.0);
        let arch = small_arch();
        let no_colloc = SubdomainData {
            conditions: vec![labeled(0.0, 0.0, 0.0)],
            ..Default::default()
        };
        let err =
            SubdomainObjective::new(&problem, &arch, no_colloc, LossWeights::default(), false, false)
                .unwrap_err();
        assert!(err.to_string().contains("MSE_f"), "{err}");

        let no_cond = SubdomainData {
            collocation: vec![(0.0, 0.5)],
            ..Default::default()
        };
        let err =
            SubdomainObjective::new(&problem, &arch, no_cond, LossWeights::default(), false, false)
                .unwrap_err();
        assert!(err.to_string().contains("MSE_u"), "{err}");

        let no_sld = SubdomainData {
            conditions: vec![labeled(0.0, 0.0, 0.0)],
            collocation: vec![(0.0, 0.5)],
            ..Default::default()
        };
        let err =
            SubdomainObjective::new(&problem, &arch, no_sld, LossWeights::default(), false, true)
                .unwrap_err();
        assert!(err.to_string().contains("MSE_p"), "{err}");
    }

    /// Directional finite-difference check of the full gradient for every
    /// objective flavor, including the ISC term's u-dependence and λ.
    #[test]
    fn objective_gradients_match_directional_finite_differences() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);

        let mut check = |loss_at: &mut dyn FnMut(&[f64], &mut [f64]) -> f64, p0: &[f64]| {
            let mut g = vec![0.0; p0.len()];
            let l0 = loss_at(p0, &mut g);
            assert!(l0.is_finite());
            let h = 1e-6;
            for _ in 0..8 {
                let mut d: Vec<f64> = (0..p0.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let nrm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                d.iter_mut().for_each(|v| *v /= nrm);
                let mut scratch = vec![0.0; p0.len()];
                let shift = |s: f64, scratch: &mut Vec<f64>, f: &mut dyn FnMut(&[f64], &mut [f64]) -> f64| {
                    let p: Vec<f64> = p0.iter().zip(&d).map(|(a, b)| a + s * b).collect();
                    f(&p, scratch)
                };
                let fp = shift(h, &mut scratch, loss_at);
                let fm = shift(-h, &mut scratch, loss_at);
                let fd = (fp - fm) / (2.0 * h);
                let ad: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
                assert!(
                    (ad - fd).abs() <= 1e-4 * fd.abs().max(1e-6),
                    "directional derivative {ad} vs fd {fd}"
                );
            }
        };

        // sdPINN-isc on the NVF problem (η depends on u there) with λ-free net.
        let nvf = Problem::nvf();
        let arch = small_arch();
        let data = SubdomainData {
            conditions: vec![labeled(0.2, 0.5, 4.0), labeled(-0.3, 0.5, 6.0)],
            interface_labeled: vec![labeled(0.5, 0.6, 5.0)],
            collocation: vec![(0.3, 0.7), (-0.2, 0.8), (0.0, 0.9)],
            ..Default::default()
        };
        let mut obj =
            SubdomainObjective::new(&nvf, &arch, data, LossWeights::default(), true, false).unwrap();
        let p0 = init_xavier(&arch, 41).values;
        check(&mut |p, g| obj.eval(p, g), &p0);

        // Inverse KdV with λ appended.
        let kdv = Problem::kdv(5.0);
        let data = SubdomainData {
            conditions: vec![labeled(-0.5, 0.0, 2.0)],
            interface_labeled: vec![labeled(0.0, 0.25, -4.75)],
            interior_labels: vec![labeled(0.2, 0.1, 0.7), labeled(0.6, 0.2, 1.1)],
            collocation: vec![(0.3, 0.2), (0.8, 0.3)],
            ..Default::default()
        };
        let mut obj =
            SubdomainObjective::new(&kdv, &arch, data, LossWeights::default(), false, true).unwrap();
        let mut p0 = init_xavier(&arch, 42).values;
        p0.push(0.4);
        check(&mut |p, g| obj.eval(p, g), &p0);

        // XPINN pair with coupled interface terms.
        let data = vec![
            SubdomainData {
                conditions: vec![labeled(-0.5, 0.0, 2.0)],
                collocation: vec![(0.1, 0.1), (0.4, 0.2)],
                ..Default::default()
            },
            SubdomainData {
                conditions: vec![labeled(0.5, 0.0, 1.0)],
                collocation: vec![(-0.5, 0.5)],
                ..Default::default()
            },
        ];
        let mut obj = XpinnObjective::new(
            &kdv,
            &[arch.clone(), arch.clone()],
            data,
            vec![InterfaceCoupling { left: 0, right: 1, points: vec![(0.0, 0.25), (0.5, 0.5)] }],
            LossWeights::default(),
        )
        .unwrap();
        let mut p0 = init_xavier(&arch, 43).values;
        p0.extend(init_xavier(&arch, 44).values);
        check(&mut |p, g| obj.eval(p, g), &p0);
    }
}
