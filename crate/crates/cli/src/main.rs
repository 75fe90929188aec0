use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdpinn_cli::runner::{self, RunOptions};
use sdpinn_cli::{report, Result};

/// Forward and inverse PDE benchmarks with symmetry-group domain-decomposed
/// physics-informed neural networks.
#[derive(Parser)]
#[command(name = "sdpinn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (method, seed) combination of an experiment config.
    Run {
        /// JSON experiment configuration.
        config: PathBuf,
        /// Worker-pool size for independent sessions.
        #[arg(long, default_value_t = runner::default_workers())]
        workers: usize,
        /// Offset added to every seed in the config.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
    },
    /// Aggregate a run directory's summary into per-method means/medians.
    Report {
        /// Directory containing summary.csv.
        dir: PathBuf,
    },
    /// Re-run a kdv config over a range of solution amplitudes b.
    Sweep {
        /// JSON experiment configuration.
        config: PathBuf,
        /// Swept parameter (only `b` is supported).
        #[arg(long)]
        param: String,
        /// Comma-separated values or an inclusive integer range `lo..hi`.
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = runner::default_workers())]
        workers: usize,
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, workers, seed_offset } => {
            let summary =
                runner::run_experiment(&config, &RunOptions { workers, seed_offset })?;
            println!("summary written to {}", summary.display());
        }
        Command::Report { dir } => {
            let (path, table) = report::emit_report(&dir)?;
            print!("{table}");
            println!("report written to {}", path.display());
        }
        Command::Sweep { config, param, values, workers, seed_offset } => {
            let values = runner::parse_values(&values)?;
            let summary = runner::run_sweep(
                &config,
                &param,
                &values,
                &RunOptions { workers, seed_offset },
            )?;
            println!("sweep summary written to {}", summary.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
