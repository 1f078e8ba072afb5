use serde::{Deserialize, Serialize};

use super::hausdorff::{directed_hausdorff, set_distance, PointCloud};
use super::SetError;

/// Axis-aligned box in real coordinates inside which limits are compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbientBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// A sampled set in real coordinates together with its sampling mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub cloud: PointCloud,
    pub mesh: f64,
}

impl Sampled {
    pub fn new(cloud: PointCloud, mesh: f64) -> Self {
        Self { cloud, mesh }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KuratowskiReport {
    pub cond1: bool,
    pub cond2: bool,
    /// First sequence index of the tail over which both conditions are checked.
    pub nu0: usize,
    /// `sup_{p in limit} dist(p, F_nu)` for every index.
    pub lower_gaps: Vec<f64>,
    /// `min_i dist(witness_i, F_nu)` for every index.
    pub witness_gaps: Vec<f64>,
    pub tol: f64,
}

impl KuratowskiReport {
    pub fn passed(&self) -> bool {
        self.cond1 && self.cond2
    }
}

/// Sampled check of Kuratowski convergence `F_nu -> limit`.
///
/// The limit is clipped to `ambient` first. Over the tail `nu >= nu0` (the
/// later half of the sequence), condition one asks that every clipped limit
/// point lie within `tol` of `F_nu`; condition two asks that `F_nu` stay more
/// than `tol` away from every witness, each of which must itself be farther
/// than `tol` from the limit.
pub fn kuratowski_check(
    seq: &[Sampled],
    limit: &Sampled,
    witnesses: &[Sampled],
    ambient: &AmbientBox,
    tol: f64,
) -> Result<KuratowskiReport, SetError> {
    if seq.is_empty() {
        return Err(SetError::Invalid("empty sequence".into()));
    }
    let dim = limit.cloud.dim();
    if ambient.lo.len() != dim || ambient.hi.len() != dim {
        return Err(SetError::DimensionMismatch {
            expected: dim,
            found: ambient.lo.len().max(ambient.hi.len()),
        });
    }
    if let Some(s) = seq.iter().chain(witnesses).find(|s| s.cloud.dim() != dim) {
        return Err(SetError::DimensionMismatch {
            expected: dim,
            found: s.cloud.dim(),
        });
    }
    let mesh = seq
        .iter()
        .chain(witnesses)
        .chain(std::iter::once(limit))
        .map(|s| s.mesh)
        .fold(0.0, f64::max);
    if !(tol > mesh) {
        return Err(SetError::ToleranceBelowMesh { tol, mesh });
    }
    let clipped = limit.cloud.clipped(&ambient.lo, &ambient.hi);
    if clipped.is_empty() {
        return Err(SetError::Invalid("limit has no points inside the ambient box".into()));
    }
    for (i, w) in witnesses.iter().enumerate() {
        let gap = set_distance(&w.cloud, &limit.cloud);
        if !(gap > tol) {
            return Err(SetError::WitnessNotDisjoint { index: i, gap });
        }
    }
    let nu0 = seq.len() / 2;
    let lower_gaps: Vec<f64> = seq
        .iter()
        .map(|f| directed_hausdorff(&clipped, &f.cloud))
        .collect();
    let witness_gaps: Vec<f64> = seq
        .iter()
        .map(|f| {
            witnesses
                .iter()
                .map(|w| set_distance(&w.cloud, &f.cloud))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(KuratowskiReport {
        cond1: lower_gaps[nu0..].iter().all(|&g| g <= tol),
        cond2: witness_gaps[nu0..].iter().all(|&g| g > tol),
        nu0,
        lower_gaps,
        witness_gaps,
        tol,
    })
}
