//! Batch execution of (method, seed, sub-domain) sessions.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use sdpinn_core::geometry::{partition, Partition};
use sdpinn_core::problems::Problem;
use sdpinn_core::training::{
    l2_relative_error, stitch, train_inverse, train_subdomain, train_xpinn, Method, SessionResult,
    TrainingConfig,
};

use crate::config::ExperimentConfig;
use crate::{checkpoint, CliError, Result};

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub workers: usize,
    pub seed_offset: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { workers: default_workers(), seed_offset: 0 }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Default output root: `$SDPINN_OUTPUT_ROOT` or `./runs`.
pub fn output_root() -> PathBuf {
    std::env::var_os("SDPINN_OUTPUT_ROOT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn fmt_f(v: f64) -> String {
    format!("{v:.17e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

/// One training session to dispatch.
struct Task {
    method_idx: usize,
    seed: u64,
    unit: Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    /// Whole-rectangle single network (pinn).
    Whole,
    /// One independent band session (sdpinn, sdpinn_isc).
    Band(usize),
    /// Joint multi-network session (xpinn).
    Joint,
    /// Inverse session (sub-domain or whole per method).
    Inverse,
}

fn run_task(
    problem: &Problem,
    part: &Partition,
    whole: &Partition,
    cfg: &TrainingConfig,
    task: &Task,
) -> sdpinn_core::Result<SessionResult> {
    match task.unit {
        Unit::Whole => train_subdomain(problem, whole, 0, cfg, task.seed),
        Unit::Band(i) => train_subdomain(problem, part, i, cfg, task.seed),
        Unit::Joint => train_xpinn(problem, part, cfg, task.seed),
        Unit::Inverse => train_inverse(problem, part, cfg, task.seed),
    }
}

/// Fixed-slot worker pool: results land in task order regardless of the
/// worker count, so summaries are bitwise identical for any `--workers`.
fn run_parallel<T, R, F>(items: Vec<T>, workers: usize, f: F) -> Vec<R>
where
    T: Send + Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let n = items.len();
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let items_ref = &items;
    let f_ref = &f;
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, n.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = f_ref(&items_ref[i]);
                *results[i].lock().unwrap() = Some(r);
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("worker filled its slot"))
        .collect()
}

/// A finished (method, seed) run ready for the summary.
struct RunOutcome {
    method_name: String,
    seed: u64,
    status: String,
    error: Option<f64>,
    band_errors: Vec<Option<f64>>,
    lambda: Option<f64>,
    lambda_rel_err: Option<f64>,
    iterations: Option<usize>,
}

/// Executes a parsed config into `out_dir`; returns the summary CSV path.
pub fn run_config(
    config: &ExperimentConfig,
    out_dir: &Path,
    opts: &RunOptions,
) -> Result<PathBuf> {
    config.validate()?;
    let problem = config.problem()?;
    let part = partition(problem.rect(), problem.group(), &config.thresholds)?;
    let whole = partition(problem.rect(), problem.group(), &[])?;
    std::fs::create_dir_all(out_dir).map_err(CliError::io(out_dir.display().to_string()))?;
    // Echo the resolved config next to the artifacts for replay.
    let echo = serde_json::to_string_pretty(config)
        .map_err(|e| CliError::Config(format!("config echo: {e}")))?;
    std::fs::write(out_dir.join("config.json"), echo)
        .map_err(CliError::io(out_dir.join("config.json").display().to_string()))?;

    let seeds: Vec<u64> = config.seeds.iter().map(|s| s + opts.seed_offset).collect();
    let n_bands = config.n_bands();

    // Resolve per-method training configs once.
    let mut method_cfgs = Vec::new();
    for m in 0..config.methods.len() {
        method_cfgs.push(config.training_config(m)?);
    }

    let mut tasks = Vec::new();
    for (method_idx, (method, _)) in method_cfgs.iter().enumerate() {
        for &seed in &seeds {
            match method {
                Method::Pinn => tasks.push(Task { method_idx, seed, unit: Unit::Whole }),
                Method::SdPinn | Method::SdPinnIsc => {
                    for band in 0..n_bands {
                        tasks.push(Task { method_idx, seed, unit: Unit::Band(band) });
                    }
                }
                Method::Xpinn => tasks.push(Task { method_idx, seed, unit: Unit::Joint }),
                Method::Inverse | Method::InversePinn => {
                    tasks.push(Task { method_idx, seed, unit: Unit::Inverse })
                }
            }
        }
    }

    let results = run_parallel(tasks, opts.workers, |task| {
        let cfg = &method_cfgs[task.method_idx].1;
        (
            task.method_idx,
            task.seed,
            task.unit,
            run_task(&problem, &part, &whole, cfg, task),
        )
    });

    // Group session results back into (method, seed) runs, in config order.
    let mut outcomes = Vec::new();
    for (method_idx, (method, cfg)) in method_cfgs.iter().enumerate() {
        for &seed in &seeds {
            let sessions: Vec<&(usize, u64, Unit, sdpinn_core::Result<SessionResult>)> = results
                .iter()
                .filter(|(m, s, _, _)| *m == method_idx && *s == seed)
                .collect();
            let outcome = assemble_run(
                config,
                &problem,
                &part,
                *method,
                cfg,
                seed,
                &sessions,
                out_dir,
            )?;
            outcomes.push(outcome);
        }
    }

    let summary_path = out_dir.join("summary.csv");
    write_summary(&summary_path, config, &outcomes, n_bands)?;
    Ok(summary_path)
}

/// Parses the config file and runs it; the output directory comes from the
/// config or defaults to `<output root>/<config stem>`.
pub fn run_experiment(config_path: &Path, opts: &RunOptions) -> Result<PathBuf> {
    let config = ExperimentConfig::from_file(config_path)?;
    let out_dir = match &config.output_dir {
        Some(d) => PathBuf::from(d),
        None => {
            let stem = config_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "experiment".into());
            output_root().join(stem)
        }
    };
    run_config(&config, &out_dir, opts)
}

#[allow(clippy::too_many_arguments)]
fn assemble_run(
    config: &ExperimentConfig,
    problem: &Problem,
    part: &Partition,
    method: Method,
    cfg: &TrainingConfig,
    seed: u64,
    sessions: &[&(usize, u64, Unit, sdpinn_core::Result<SessionResult>)],
    out_dir: &Path,
) -> Result<RunOutcome> {
    let n_bands = part.subdomains.len();
    let run_dir = out_dir.join(format!("{}_{}_seed{}", problem.name(), method.as_str(), seed));
    std::fs::create_dir_all(&run_dir).map_err(CliError::io(run_dir.display().to_string()))?;

    // A failed session flags the whole (method, seed) row; other rows go on.
    if let Some((_, _, _, Err(e))) = sessions.iter().find(|(_, _, _, r)| r.is_err()) {
        return Ok(RunOutcome {
            method_name: method.as_str().into(),
            seed,
            status: format!("failed: {e}"),
            error: None,
            band_errors: vec![None; n_bands],
            lambda: None,
            lambda_rel_err: None,
            iterations: None,
        });
    }

    let mut nets = Vec::new();
    let mut iterations = 0usize;
    let mut lambda = None;
    let mut lambda_rel_err = None;
    let mut points_csv = String::from("x,t,u_label,kind,subdomain\n");

    for (_, _, unit, result) in sessions {
        let r = result.as_ref().expect("failures handled above");
        iterations += r.trace.records.len();
        let suffix = match unit {
            Unit::Band(i) => format!("_sub{i}"),
            _ => String::new(),
        };
        std::fs::write(run_dir.join(format!("trace{suffix}.csv")), r.trace.to_csv())
            .map_err(CliError::io(run_dir.display().to_string()))?;

        let mut reports_csv =
            String::from("iteration,mse_u,mse_f,mse_g,mse_r,mse_u_avg,mse_p,total\n");
        for (iter, rep) in &r.reports {
            reports_csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                iter,
                fmt_opt(rep.mse_u),
                fmt_opt(rep.mse_f),
                fmt_opt(rep.mse_g),
                fmt_opt(rep.mse_r),
                fmt_opt(rep.mse_u_avg),
                fmt_opt(rep.mse_p),
                fmt_f(rep.total),
            ));
        }
        std::fs::write(run_dir.join(format!("loss_reports{suffix}.csv")), reports_csv)
            .map_err(CliError::io(run_dir.display().to_string()))?;

        for (k, (arch, params)) in r.archs.iter().zip(&r.params).enumerate() {
            let name = match unit {
                Unit::Band(i) => format!("params_sub{i}.ckpt"),
                Unit::Joint => format!("params_sub{k}.ckpt"),
                _ => "params.ckpt".to_string(),
            };
            checkpoint::write_checkpoint(&run_dir.join(name), arch, params)?;
        }

        for p in &r.points {
            points_csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f(p.x),
                fmt_f(p.t),
                fmt_opt(p.label),
                p.kind,
                p.subdomain
            ));
        }

        if let Some(inv) = &r.inverse {
            lambda = Some(inv.lambda);
            lambda_rel_err = Some(inv.lambda_rel_err);
        }
        nets.push((unit, r));
    }
    std::fs::write(run_dir.join("points.csv"), points_csv)
        .map_err(CliError::io(run_dir.display().to_string()))?;

    // Stitch: per-band networks for decomposed methods, a single network
    // otherwise.
    let stitch_nets: Vec<(sdpinn_core::Architecture, sdpinn_core::ParameterVector)> =
        match method {
            Method::SdPinn | Method::SdPinnIsc => {
                let mut per_band = vec![None; n_bands];
                for (unit, r) in &nets {
                    if let Unit::Band(i) = unit {
                        per_band[*i] = Some((r.archs[0].clone(), r.params[0].clone()));
                    }
                }
                per_band.into_iter().map(|n| n.expect("one session per band")).collect()
            }
            Method::Xpinn => {
                let (_, r) = nets[0];
                r.archs.iter().cloned().zip(r.params.iter().cloned()).collect()
            }
            _ => {
                let (_, r) = nets[0];
                vec![(r.archs[0].clone(), r.params[0].clone())]
            }
        };

    let grid = stitch(problem, part, &stitch_nets, config.grid.n_x, config.grid.n_t)?;
    let mut grid_csv = String::from("x,t,pred,exact,abs_err,subdomain\n");
    let n_t = grid.ts.len();
    for (i, ((p, e), s)) in grid.pred.iter().zip(&grid.exact).zip(&grid.subdomain).enumerate() {
        grid_csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f(grid.xs[i / n_t]),
            fmt_f(grid.ts[i % n_t]),
            fmt_f(*p),
            fmt_f(*e),
            fmt_f((p - e).abs()),
            s
        ));
    }
    std::fs::write(run_dir.join("grid.csv"), grid_csv)
        .map_err(CliError::io(run_dir.display().to_string()))?;

    let band_errors: Vec<Option<f64>> = (0..n_bands)
        .map(|b| l2_relative_error(&grid, Some(b)).ok())
        .collect();
    // Inverse runs report the error on their training band (the PINN
    // baseline is evaluated there too, for a like-for-like comparison).
    let error = if method.is_inverse() {
        band_errors.get(cfg.target_subdomain).copied().flatten()
    } else {
        l2_relative_error(&grid, None).ok()
    };

    Ok(RunOutcome {
        method_name: method.as_str().into(),
        seed,
        status: "ok".into(),
        error,
        band_errors,
        lambda,
        lambda_rel_err,
        iterations: Some(iterations),
    })
}

fn write_summary(
    path: &Path,
    config: &ExperimentConfig,
    outcomes: &[RunOutcome],
    n_bands: usize,
) -> Result<()> {
    let mut csv = String::from("problem,b,method,seed,status,error");
    for b in 1..=n_bands {
        csv.push_str(&format!(",error_{b}"));
    }
    csv.push_str(",lambda,lambda_rel_err,iterations\n");
    for o in outcomes {
        csv.push_str(&format!(
            "{},{},{},{},{},{}",
            config.problem.name,
            fmt_f(config.problem.b),
            o.method_name,
            o.seed,
            o.status,
            fmt_opt(o.error),
        ));
        for b in 0..n_bands {
            csv.push(',');
            csv.push_str(&fmt_opt(o.band_errors.get(b).copied().flatten()));
        }
        csv.push_str(&format!(
            ",{},{},{}\n",
            fmt_opt(o.lambda),
            fmt_opt(o.lambda_rel_err),
            o.iterations.map(|i| i.to_string()).unwrap_or_default(),
        ));
    }
    std::fs::write(path, csv).map_err(CliError::io(path.display().to_string()))?;
    Ok(())
}

/// Amplitude sweep: re-runs the config once per value of b, collecting all
/// summary rows into `sweep_summary.csv` under the sweep directory.
pub fn run_sweep(
    config_path: &Path,
    param: &str,
    values: &[f64],
    opts: &RunOptions,
) -> Result<PathBuf> {
    if param != "b" {
        return Err(CliError::Config(format!(
            "only the amplitude parameter `b` can be swept, got '{param}'"
        )));
    }
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let base = ExperimentConfig::from_file(config_path)?;
    if base.problem.name != "kdv" {
        return Err(CliError::Config("the amplitude sweep applies to the kdv problem".into()));
    }
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".into());
    let sweep_dir = match &base.output_dir {
        Some(d) => PathBuf::from(format!("{d}_sweep")),
        None => output_root().join(format!("{stem}_sweep")),
    };
    std::fs::create_dir_all(&sweep_dir).map_err(CliError::io(sweep_dir.display().to_string()))?;

    let mut all_rows = Vec::new();
    let mut header = None;
    for &b in values {
        let mut cfg = base.clone();
        cfg.problem.b = b;
        cfg.output_dir = None;
        let dir = sweep_dir.join(format!("b_{b}"));
        let summary = run_config(&cfg, &dir, opts)?;
        let text =
            std::fs::read_to_string(&summary).map_err(CliError::io(summary.display().to_string()))?;
        let mut lines = text.lines();
        let h = lines.next().unwrap_or_default().to_string();
        header.get_or_insert(h);
        all_rows.extend(lines.map(|l| l.to_string()));
    }

    let out = sweep_dir.join("sweep_summary.csv");
    let mut csv = header.unwrap_or_default();
    csv.push('\n');
    for row in all_rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    std::fs::write(&out, csv).map_err(CliError::io(out.display().to_string()))?;
    Ok(out)
}

/// Parses `--values`: comma-separated floats or an inclusive integer range
/// `lo..hi`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: i64 = lo
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad range start '{lo}'")))?;
        let hi: i64 = hi
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad range end '{hi}'")))?;
        if hi < lo {
            return Err(CliError::Config(format!("empty range {lo}..{hi}")));
        }
        return Ok((lo..=hi).map(|v| v as f64).collect());
    }
    spec.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad sweep value '{v}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_spec_parses_lists_and_ranges() {
        assert_eq!(parse_values("1,2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert_eq!(parse_values("1..4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(parse_values("x").is_err());
        assert!(parse_values("5..2").is_err());
    }

    #[test]
    fn parallel_runner_preserves_task_order() {
        let items: Vec<usize> = (0..57).collect();
        let doubled = run_parallel(items, 4, |&i| i * 2);
        assert_eq!(doubled, (0..57).map(|i| i * 2).collect::<Vec<_>>());
    }
}
