//! Experiment configuration, batch execution and report generation.
//!
//! A JSON experiment config names the problem, the partition thresholds, a
//! list of method configurations and the seeds; `run` executes every
//! (method, seed, sub-domain) session through a worker pool and writes
//! loss traces, parameter checkpoints, solution grids, training-point dumps
//! and one summary row per (method, seed). `report` aggregates summaries
//! into per-method means and medians; `sweep` repeats a config over a
//! range of solution amplitudes.

pub mod checkpoint;
pub mod config;
pub mod report;
pub mod runner;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sdpinn_core::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config error: {0}")]
    Config(String),
}

impl CliError {
    pub(crate) fn io(path: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
