//! Experiment runner: reads a JSON config, runs one pipeline, and writes a
//! results JSON, a rate table and tidy plot data.

pub mod config;
pub mod output;
pub mod run;

use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::{Command, ExperimentConfig, Overrides};
pub use run::{execute, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

macro_rules! numerical_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numerical(e.to_string())
            }
        }
    )*};
}

numerical_from!(
    bws_core::forward::ForwardError,
    bws_core::converse::ConverseError,
    bws_core::chebyshev::ChebError,
    bws_core::demos::DemoError,
    bws_core::sets::SetError,
    bws_core::extremal::ExtremalError
);

impl CliError {
    /// 2 for configuration problems, 3 for everything that failed while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 3,
        }
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json serializes");
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Runs `cfg` and writes its artifacts into `out`. Returns whether every
/// asserted invariant held. On a numerical failure a results file marked
/// `"flagged": true` is still written before the error is returned.
pub fn run_to_dir(cfg: &ExperimentConfig, base_dir: &Path, out: &Path, seed: u64) -> Result<bool, CliError> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    let results_path = out.join(&cfg.output.results);
    match execute(cfg, base_dir) {
        Ok(o) => {
            let all_pass = o.all_pass();
            let invariants: serde_json::Map<String, serde_json::Value> =
                o.invariants.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            write_json(
                &results_path,
                &json!({
                    "status": "ok",
                    "flagged": false,
                    "seed": seed,
                    "config": cfg,
                    "invariants": invariants,
                    "all_pass": all_pass,
                    "result": o.result,
                }),
            )?;
            o.rates.write(&out.join(&cfg.output.rates))?;
            o.plot.write(&out.join(&cfg.output.plot))?;
            Ok(all_pass)
        }
        Err(e @ CliError::Config { .. }) => Err(e),
        Err(e) => {
            write_json(
                &results_path,
                &json!({
                    "status": "failed",
                    "flagged": true,
                    "seed": seed,
                    "config": cfg,
                    "error": e.to_string(),
                }),
            )?;
            Err(e)
        }
    }
}
