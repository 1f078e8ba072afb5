use serde::{Deserialize, Serialize};

use super::compact::{decode_points, encode_points, estimated_mesh};
use super::hausdorff::{hausdorff_complex, PointCloud};
use super::{SampledCompact, SetError};
use crate::Complex;

/// A sampled multigraph `Y ⊂ K × ℂ`: a finite fiber over every sample point of `K`.
///
/// Fibers are multisets; repeated roots appear repeatedly. Indices in `flagged`
/// mark sample points whose fiber is unreliable (for instance a root solve
/// that did not converge); they are skipped by [`delta_k`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MultigraphJson", into = "MultigraphJson")]
pub struct Multigraph {
    base: SampledCompact,
    fibers: Vec<Vec<Complex>>,
    n: usize,
    flagged: Vec<usize>,
}

impl Multigraph {
    pub fn new(base: SampledCompact, fibers: Vec<Vec<Complex>>, n: usize) -> Result<Self, SetError> {
        Self::with_flags(base, fibers, n, Vec::new())
    }

    pub fn with_flags(
        base: SampledCompact,
        fibers: Vec<Vec<Complex>>,
        n: usize,
        mut flagged: Vec<usize>,
    ) -> Result<Self, SetError> {
        if base.is_empty() {
            return Err(SetError::EmptySample);
        }
        if fibers.len() != base.len() {
            return Err(SetError::FiberInvalid {
                index: fibers.len().min(base.len()),
                reason: format!("{} fibers for {} base points", fibers.len(), base.len()),
            });
        }
        for (i, f) in fibers.iter().enumerate() {
            if f.is_empty() || f.len() > n {
                return Err(SetError::FiberInvalid {
                    index: i,
                    reason: format!("fiber has {} points, covering number is {n}", f.len()),
                });
            }
            if f.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(SetError::FiberInvalid {
                    index: i,
                    reason: "non-finite fiber point".into(),
                });
            }
        }
        flagged.sort_unstable();
        flagged.dedup();
        if let Some(&i) = flagged.iter().find(|&&i| i >= base.len()) {
            return Err(SetError::FiberInvalid {
                index: i,
                reason: "flagged index out of range".into(),
            });
        }
        Ok(Self {
            base,
            fibers,
            n,
            flagged,
        })
    }

    /// Graph of a single-valued function: every fiber is `{values[i]}`.
    pub fn graph_of(base: SampledCompact, values: &[Complex]) -> Result<Self, SetError> {
        Self::new(base, values.iter().map(|&v| vec![v]).collect(), 1)
    }

    pub fn base(&self) -> &SampledCompact {
        &self.base
    }

    pub fn fibers(&self) -> &[Vec<Complex>] {
        &self.fibers
    }

    pub fn fiber(&self, i: usize) -> &[Complex] {
        &self.fibers[i]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flagged(&self) -> &[usize] {
        &self.flagged
    }

    pub fn is_flagged(&self, i: usize) -> bool {
        self.flagged.binary_search(&i).is_ok()
    }

    /// Every fiber translated by `c`.
    pub fn translated(&self, c: Complex) -> Self {
        Self {
            fibers: self
                .fibers
                .iter()
                .map(|f| f.iter().map(|z| z + c).collect())
                .collect(),
            ..self.clone()
        }
    }

    /// The graph `⋃ {x} × Y(x)` as real `(2m + 2)`-vectors, skipping flagged points.
    pub fn graph_cloud(&self) -> PointCloud {
        self.graph_cloud_excluding(&[])
    }

    fn graph_cloud_excluding(&self, extra: &[usize]) -> PointCloud {
        let m = self.base.m();
        let mut c = PointCloud::new(2 * m + 2);
        let mut buf = Vec::with_capacity(m + 1);
        for (i, (x, fib)) in self.base.points().iter().zip(&self.fibers).enumerate() {
            if self.is_flagged(i) || extra.binary_search(&i).is_ok() {
                continue;
            }
            for &t in fib {
                buf.clear();
                buf.extend_from_slice(x);
                buf.push(t);
                c.push_complex(&buf);
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    /// `max_x d_H(Y(x), W(x))` over unflagged sample points.
    pub delta: f64,
    /// Hausdorff distance between the sampled graphs.
    pub graph_dh: f64,
    /// Sample points skipped because either side flagged them.
    pub skipped: usize,
}

/// Fiberwise distance `δ_K(Y, W)` and the graph distance it dominates.
///
/// Both multigraphs must live over the same sample points. Points flagged on
/// either side are left out of both quantities.
pub fn delta_k(y: &Multigraph, w: &Multigraph) -> Result<DeltaReport, SetError> {
    if y.base.m() != w.base.m()
        || y.base.len() != w.base.len()
        || y.base.points() != w.base.points()
    {
        return Err(SetError::BaseMismatch);
    }
    let mut skip: Vec<usize> = y.flagged.iter().chain(&w.flagged).copied().collect();
    skip.sort_unstable();
    skip.dedup();
    let delta = (0..y.fibers.len())
        .filter(|i| skip.binary_search(i).is_err())
        .map(|i| hausdorff_complex(&y.fibers[i], &w.fibers[i]))
        .fold(0.0, f64::max);
    let graph_dh = super::hausdorff(
        &y.graph_cloud_excluding(&skip),
        &w.graph_cloud_excluding(&skip),
        y.base.ambient_diam(),
    )?;
    // both sides use the same subtractions, so only the final square root can differ
    if graph_dh > delta * (1.0 + 1e-12) + f64::MIN_POSITIVE {
        return Err(SetError::InequalityViolated { graph_dh, delta });
    }
    Ok(DeltaReport {
        delta,
        graph_dh,
        skipped: skip.len(),
    })
}

/// Wire form: `{"m", "points", "fibers": [[[re, im], …], …], "n", "mesh", "ambient_diam", "flagged"}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MultigraphJson {
    m: usize,
    points: Vec<Vec<f64>>,
    fibers: Vec<Vec<[f64; 2]>>,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mesh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ambient_diam: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    flagged: Vec<usize>,
}

impl TryFrom<MultigraphJson> for Multigraph {
    type Error = SetError;

    fn try_from(j: MultigraphJson) -> Result<Self, SetError> {
        let points = decode_points(j.m, &j.points)?;
        let mesh = j.mesh.unwrap_or_else(|| estimated_mesh(&points));
        let mut base = SampledCompact::new(j.m, points, mesh)?;
        if let Some(d) = j.ambient_diam {
            base = base.with_ambient_diam(d);
        }
        let fibers = j
            .fibers
            .into_iter()
            .map(|f| f.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
            .collect();
        Self::with_flags(base, fibers, j.n, j.flagged)
    }
}

impl From<Multigraph> for MultigraphJson {
    fn from(g: Multigraph) -> Self {
        MultigraphJson {
            m: g.base.m(),
            points: encode_points(g.base.points()),
            fibers: g
                .fibers
                .iter()
                .map(|f| f.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            n: g.n,
            mesh: Some(g.base.mesh()),
            ambient_diam: g.base.ambient_diam(),
            flagged: g.flagged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm_one(k: &SampledCompact) -> Multigraph {
        let fibers = vec![vec![Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)]; k.len()];
        Multigraph::new(k.clone(), fibers, 2).unwrap()
    }

    #[test]
    fn identical_and_translated() {
        let k = SampledCompact::segment(-1.0, 1.0, 11).unwrap();
        let y = pm_one(&k);
        let r = delta_k(&y, &y).unwrap();
        assert_eq!((r.delta, r.graph_dh), (0.0, 0.0));
        let c = Complex::new(0.3, -0.4);
        let r = delta_k(&y, &y.translated(c)).unwrap();
        assert!((r.delta - 0.5).abs() < 1e-15);
        assert!(r.graph_dh <= r.delta);
    }

    #[test]
    fn rejects_bad_fibers_and_bases() {
        let k = SampledCompact::segment(0.0, 1.0, 3).unwrap();
        assert!(Multigraph::new(k.clone(), vec![vec![]; 3], 1).is_err());
        assert!(Multigraph::new(k.clone(), vec![vec![Complex::new(0.0, 0.0); 3]; 3], 2).is_err());
        let other = SampledCompact::segment(0.0, 2.0, 3).unwrap();
        let y = Multigraph::graph_of(k, &[Complex::new(0.0, 0.0); 3]).unwrap();
        let w = Multigraph::graph_of(other, &[Complex::new(0.0, 0.0); 3]).unwrap();
        assert_eq!(delta_k(&y, &w), Err(SetError::BaseMismatch));
    }

    #[test]
    fn flagged_points_are_skipped() {
        let k = SampledCompact::segment(0.0, 1.0, 3).unwrap();
        let y = Multigraph::graph_of(k.clone(), &[Complex::new(0.0, 0.0); 3]).unwrap();
        let w = Multigraph::with_flags(
            k,
            vec![vec![Complex::new(0.0, 0.0)], vec![Complex::new(9.0, 0.0)], vec![Complex::new(0.1, 0.0)]],
            1,
            vec![1],
        )
        .unwrap();
        let r = delta_k(&y, &w).unwrap();
        assert!((r.delta - 0.1).abs() < 1e-15);
        assert_eq!(r.skipped, 1);
    }

    #[test]
    fn json_round_trip() {
        let k = SampledCompact::segment(-1.0, 1.0, 4).unwrap();
        let y = pm_one(&k);
        let s = serde_json::to_string(&y).unwrap();
        assert!(s.contains("\"fibers\""));
        let back: Multigraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back.fibers(), y.fibers());
        assert_eq!(back.n(), 2);
    }
}
