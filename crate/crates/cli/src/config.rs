use std::path::{Path, PathBuf};

use bws_core::algebra::{Expr, Pseudopolynomial};
use bws_core::extremal::StandardSet;
use bws_core::sets::{AmbientBox, SampledCompact, SetError, Verdict};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Forward,
    Converse,
    ScalarBws,
    Counterexample,
    ClosureDemo,
    Extremal,
}

/// A sampled compact: a catalogue shape and its sampling step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KSpec {
    pub shape: StandardSet,
    pub mesh: f64,
}

impl KSpec {
    pub fn sample(&self) -> Result<SampledCompact, SetError> {
        SampledCompact::sample(&self.shape, self.mesh)
    }
}

fn default_root_tol() -> f64 {
    bws_core::roots::DEFAULT_TOL
}

fn default_kuratowski_tol() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_root_tol")]
    pub root: f64,
    #[serde(default = "default_kuratowski_tol")]
    pub kuratowski: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root: default_root_tol(),
            kuratowski: default_kuratowski_tol(),
        }
    }
}

fn results_name() -> String {
    "results.json".into()
}

fn rates_name() -> String {
    "rates.csv".into()
}

fn plot_name() -> String {
    "plot.csv".into()
}

/// Artifact file names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "results_name")]
    pub results: String,
    #[serde(default = "rates_name")]
    pub rates: String,
    #[serde(default = "plot_name")]
    pub plot: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            results: results_name(),
            rates: rates_name(),
            plot: plot_name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeFile {
    pub d: u32,
    pub path: PathBuf,
}

/// Externally produced multigraphs for the converse command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultigraphInputs {
    pub y: PathBuf,
    pub w: Vec<DegreeFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<KSpec>,
    /// Coefficients `a_1, ..., a_n` of a monic pseudopolynomial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Pseudopolynomial>,
    /// Scalar function for `scalar-bws`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Expr>,
    /// Inclusive degree range `[lo, hi]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_range: Option<[u32; 2]>,
    /// Only even degrees from `d_range`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub even_degrees: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<MultigraphInputs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    /// Sampling step for `counterexample` and `closure-demo`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<AmbientBox>,
    /// Evaluation points for `extremal`, each a list of `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<[f64; 2]>>>,
    /// Expected verdict of the `scalar-bws` fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Verdict>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Values given on the command line that override the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub mesh: Option<f64>,
    pub tol: Option<f64>,
}

fn invalid(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        message: msg.into(),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config {
                field: if path == "." { "<root>".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(m) = o.mesh {
            match self.command {
                Command::Counterexample | Command::ClosureDemo => self.mesh = Some(m),
                _ => {
                    if let Some(k) = self.k.as_mut() {
                        k.mesh = m;
                    }
                }
            }
        }
        if let Some(t) = o.tol {
            match self.command {
                Command::ClosureDemo => self.tolerances.kuratowski = t,
                _ => self.tolerances.root = t,
            }
        }
    }

    /// Degrees listed by `d_range` and `even_degrees`.
    pub fn degrees(&self) -> Result<Vec<u32>, CliError> {
        let [lo, hi] = self.d_range.ok_or_else(|| invalid("d_range", "required"))?;
        if lo > hi {
            return Err(invalid("d_range", format!("empty range [{lo}, {hi}]")));
        }
        Ok((lo..=hi).filter(|d| !self.even_degrees || d % 2 == 0).collect())
    }

    pub fn require_k(&self) -> Result<&KSpec, CliError> {
        let k = self.k.as_ref().ok_or_else(|| invalid("k", "required"))?;
        if !(k.mesh > 0.0 && k.mesh.is_finite()) {
            return Err(invalid("k.mesh", format!("must be positive, got {}", k.mesh)));
        }
        k.shape
            .validate()
            .map_err(|e| invalid("k.shape", e.to_string()))?;
        Ok(k)
    }

    fn require_mesh(&self) -> Result<f64, CliError> {
        match self.mesh {
            Some(m) if m > 0.0 && m.is_finite() => Ok(m),
            Some(m) => Err(invalid("mesh", format!("must be positive, got {m}"))),
            None => Err(invalid("mesh", "required")),
        }
    }

    /// Checks that the fields the command needs are present and sane.
    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        if !(t.root > 0.0) {
            return Err(invalid("tolerances.root", "must be positive"));
        }
        if !(t.kuratowski > 0.0) {
            return Err(invalid("tolerances.kuratowski", "must be positive"));
        }
        match self.command {
            Command::Forward => {
                self.require_k()?;
                self.f.as_ref().ok_or_else(|| invalid("f", "required"))?;
                self.degrees()?;
            }
            Command::Converse => {
                if let Some(inputs) = &self.inputs {
                    if inputs.w.is_empty() {
                        return Err(invalid("inputs.w", "needs at least one multigraph"));
                    }
                    self.n.ok_or_else(|| invalid("n", "required with inputs"))?;
                } else {
                    self.require_k()?;
                    self.f.as_ref().ok_or_else(|| invalid("f", "required without inputs"))?;
                    self.degrees()?;
                }
            }
            Command::ScalarBws => {
                self.require_k()?;
                self.g.as_ref().ok_or_else(|| invalid("g", "required"))?;
                self.degrees()?;
            }
            Command::Counterexample => {
                self.k_max.ok_or_else(|| invalid("k_max", "required"))?;
                self.require_mesh()?;
            }
            Command::ClosureDemo => {
                self.nu.as_ref().ok_or_else(|| invalid("nu", "required"))?;
                self.ambient.as_ref().ok_or_else(|| invalid("ambient", "required"))?;
                self.require_mesh()?;
            }
            Command::Extremal => {
                self.require_k()?;
            }
        }
        Ok(())
    }

    pub fn mesh_value(&self) -> Result<f64, CliError> {
        self.require_mesh()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(
            r#"{"command": "counterexample", "k_max": 8, "mesh": 0.000244140625}"#,
        )
        .unwrap();
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.output.rates, "rates.csv");
        c.validate().unwrap();
    }

    #[test]
    fn unknown_field_is_named() {
        let err = ExperimentConfig::from_json(r#"{"command": "forward", "colour": 1}"#).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn missing_field_for_command() {
        let c = ExperimentConfig::from_json(r#"{"command": "closure-demo", "mesh": 0.01}"#).unwrap();
        match c.validate() {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "nu"),
            other => panic!("{other:?}"),
        }
    }
}
