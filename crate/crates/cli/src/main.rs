use std::path::PathBuf;
use std::process::ExitCode;

use bws_cli::{run_to_dir, CliError, ExperimentConfig, Overrides};
use clap::{Parser, Subcommand};
use log::{error, info, warn};

/// Thread count for the parallel pipelines; defaults to all cores.
const THREADS_VAR: &str = "BWS_THREADS";

#[derive(Parser)]
#[command(name = "bws", version, about = "Polynomial approximation experiments for analytic multigraphs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Directory for results.json, rates.csv and plot.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the sampling step.
        #[arg(long)]
        mesh: Option<f64>,
        /// Override the main tolerance of the command.
        #[arg(long)]
        tol: Option<f64>,
        /// Recorded in the results; the pipelines themselves are deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn configure_threads() {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return;
    };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                warn!("could not size the thread pool: {e}");
            }
        }
        _ => warn!("ignoring {THREADS_VAR}={v}: expected a positive integer"),
    }
}

fn run(config: PathBuf, out: PathBuf, overrides: Overrides, seed: u64) -> Result<bool, CliError> {
    let mut cfg = ExperimentConfig::load(&config)?;
    cfg.apply(overrides);
    let base = config.parent().map(PathBuf::from).unwrap_or_default();
    run_to_dir(&cfg, &base, &out, seed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    configure_threads();
    let Cmd::Run {
        config,
        out,
        mesh,
        tol,
        seed,
    } = Cli::parse().command;
    match run(config, out, Overrides { mesh, tol }, seed) {
        Ok(true) => {
            info!("all invariants hold");
            ExitCode::SUCCESS
        }
        Ok(false) => {
            error!("some invariants failed; see results.json");
            ExitCode::from(1)
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
