//! Sampled compacts, Hausdorff-type distances, set convergence and rate fitting.

mod compact;
pub mod hausdorff;
mod kuratowski;
mod multigraph;
mod rate;

pub use compact::SampledCompact;
pub use hausdorff::{directed_hausdorff, hausdorff, hausdorff_complex, set_distance, PointCloud};
pub use kuratowski::{kuratowski_check, AmbientBox, KuratowskiReport, Sampled};
pub use multigraph::{delta_k, DeltaReport, Multigraph};
pub use rate::{
    fit_geometric_rate, fit_geometric_rate_with_floor, RateFit, Verdict, DEFAULT_FLOOR,
    MIN_USABLE, RESIDUAL_MAX, THETA_MAX,
};

use crate::extremal::ExtremalError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SetError {
    #[error("a sample of a nonempty set needs at least one point")]
    EmptySample,
    #[error("{0}")]
    Invalid(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("multigraphs are sampled over different base points")]
    BaseMismatch,
    #[error("one set is empty and no ambient diameter was supplied")]
    MissingAmbientDiam,
    #[error("tolerance {tol} does not exceed the sampling mesh {mesh}")]
    ToleranceBelowMesh { tol: f64, mesh: f64 },
    #[error("witness set {index} is within {gap} of the limit")]
    WitnessNotDisjoint { index: usize, gap: f64 },
    #[error("fiber {index}: {reason}")]
    FiberInvalid { index: usize, reason: String },
    #[error("graph distance {graph_dh} exceeds fiberwise distance {delta}")]
    InequalityViolated { graph_dh: f64, delta: f64 },
    #[error(transparent)]
    Shape(#[from] ExtremalError),
}
