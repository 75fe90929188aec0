//! JSON experiment configuration.
//!
//! Every knob the training consumes appears here with an explicit default;
//! a stored config re-runs to identical results. See the README for the
//! full schema table.

use serde::{Deserialize, Serialize};

use sdpinn_core::lbfgs::OptimConfig;
use sdpinn_core::mlp::Architecture;
use sdpinn_core::problems::Problem;
use sdpinn_core::training::{LossWeights, Method, SubTrainConfig, TrainingConfig};

use crate::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemConfig {
    /// `kdv` or `nvf`.
    pub name: String,
    /// Solution amplitude b (KdV only; ignored for nvf).
    #[serde(default = "default_b")]
    pub b: f64,
}

fn default_b() -> f64 {
    20.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridConfig {
    pub n_x: usize,
    pub n_t: usize,
}

/// Network shape: either explicit `widths` or `layers` hidden layers of
/// `neurons` each.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ArchConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neurons: Option<usize>,
}

impl ArchConfig {
    pub fn resolve(&self) -> Result<Architecture> {
        match (&self.widths, self.layers, self.neurons) {
            (Some(w), None, None) => Ok(Architecture::new(w.clone())?),
            (None, Some(l), Some(n)) => Ok(Architecture::hidden(l, n)?),
            _ => Err(CliError::Config(
                "network shape needs either `widths` or both `layers` and `neurons`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubdomainConfig {
    #[serde(flatten)]
    pub arch: ArchConfig,
    pub n_u: usize,
    pub n_f: usize,
    #[serde(default = "default_n_i")]
    pub n_i: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_g: Option<usize>,
}

fn default_n_i() -> usize {
    101
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub memory: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub loss_tol: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let d = OptimConfig::default();
        Self {
            memory: d.memory,
            max_iters: d.max_iters,
            grad_tol: d.grad_tol,
            loss_tol: d.loss_tol,
            c1: d.c1,
            c2: d.c2,
        }
    }
}

impl From<OptimizerConfig> for OptimConfig {
    fn from(c: OptimizerConfig) -> OptimConfig {
        OptimConfig {
            memory: c.memory,
            max_iters: c.max_iters,
            grad_tol: c.grad_tol,
            loss_tol: c.loss_tol,
            c1: c.c1,
            c2: c.c2,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightsConfig {
    pub w_u: f64,
    pub w_f: f64,
    pub w_g: f64,
    pub w_i: f64,
    pub w_p: f64,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        let d = LossWeights::default();
        Self { w_u: d.w_u, w_f: d.w_f, w_g: d.w_g, w_i: d.w_i, w_p: d.w_p }
    }
}

impl From<WeightsConfig> for LossWeights {
    fn from(c: WeightsConfig) -> LossWeights {
        LossWeights { w_u: c.w_u, w_f: c.w_f, w_g: c.w_g, w_i: c.w_i, w_p: c.w_p }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodConfig {
    /// pinn | xpinn | sdpinn | sdpinn_isc | inverse | inverse_pinn.
    pub method: String,
    /// One entry per sub-domain, or a single entry replicated to all bands.
    pub subdomains: Vec<SubdomainConfig>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub lambda_init: f64,
    #[serde(default = "default_n_p")]
    pub n_p: usize,
    #[serde(default = "default_ld_epsilon")]
    pub ld_epsilon: f64,
    #[serde(default = "default_ld_k_max")]
    pub ld_k_max: usize,
    #[serde(default)]
    pub target_subdomain: usize,
    #[serde(default = "default_report_every")]
    pub report_every: usize,
}

fn default_n_p() -> usize {
    500
}

fn default_ld_epsilon() -> f64 {
    0.05
}

fn default_ld_k_max() -> usize {
    40
}

fn default_report_every() -> usize {
    100
}

/// A complete experiment: one problem, one partition, several methods and
/// seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    /// Dividing-line levels of the first invariant (may be empty).
    #[serde(default)]
    pub thresholds: Vec<f64>,
    pub grid: GridConfig,
    pub methods: Vec<MethodConfig>,
    pub seeds: Vec<u64>,
    /// Output directory; defaults to `$SDPINN_OUTPUT_ROOT/<config stem>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(CliError::io(path.display().to_string()))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        Problem::by_name(&self.problem.name, self.problem.b)?;
        if self.seeds.is_empty() {
            return Err(CliError::Config("seed list must not be empty".into()));
        }
        if self.methods.is_empty() {
            return Err(CliError::Config("at least one method entry is required".into()));
        }
        if self.grid.n_x < 2 || self.grid.n_t < 2 {
            return Err(CliError::Config("grid needs at least 2 points per axis".into()));
        }
        let n_bands = self.thresholds.len() + 1;
        for m in &self.methods {
            let method = Method::parse(&m.method)?;
            let per_band = match method {
                Method::Pinn | Method::InversePinn => 1,
                _ => n_bands,
            };
            if m.subdomains.len() != 1 && m.subdomains.len() != per_band {
                return Err(CliError::Config(format!(
                    "method {}: {} sub-domain entries (expected 1 or {per_band})",
                    m.method,
                    m.subdomains.len()
                )));
            }
            if method.is_inverse() && m.target_subdomain >= n_bands {
                return Err(CliError::Config(format!(
                    "method {}: target_subdomain {} out of range (0..{n_bands})",
                    m.method, m.target_subdomain
                )));
            }
            // Resolve shapes early so schema errors surface before any run.
            for s in &m.subdomains {
                s.arch.resolve()?;
                if s.n_u == 0 || s.n_f == 0 {
                    return Err(CliError::Config(format!(
                        "method {}: n_u and n_f must be positive",
                        m.method
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem::by_name(&self.problem.name, self.problem.b)?)
    }

    /// Number of partition bands.
    pub fn n_bands(&self) -> usize {
        self.thresholds.len() + 1
    }

    /// Resolves one method entry into the core training configuration.
    pub fn training_config(&self, method_idx: usize) -> Result<(Method, TrainingConfig)> {
        let m = &self.methods[method_idx];
        let method = Method::parse(&m.method)?;
        let n_bands = self.n_bands();
        let wanted = match method {
            Method::Pinn | Method::InversePinn => 1,
            _ => n_bands,
        };
        let mut subdomains = Vec::with_capacity(wanted);
        for i in 0..wanted {
            let s = if m.subdomains.len() == 1 { &m.subdomains[0] } else { &m.subdomains[i] };
            subdomains.push(SubTrainConfig {
                arch: s.arch.resolve()?,
                n_u: s.n_u,
                n_f: s.n_f,
                n_i: s.n_i,
                n_g: s.n_g,
            });
        }
        let mut cfg = TrainingConfig::new(method, subdomains);
        cfg.optim = m.optimizer.into();
        cfg.weights = m.weights.into();
        cfg.lambda_init = m.lambda_init;
        cfg.n_p = m.n_p;
        cfg.ld_epsilon = m.ld_epsilon;
        cfg.ld_k_max = m.ld_k_max;
        cfg.target_subdomain = m.target_subdomain;
        cfg.grid_nx = self.grid.n_x;
        cfg.grid_nt = self.grid.n_t;
        cfg.report_every = m.report_every;
        cfg.validate()?;
        Ok((method, cfg))
    }
}
