use serde::{Deserialize, Serialize};

use super::{PointCloud, SetError};
use crate::extremal::StandardSet;
use crate::Complex;

/// Finite sample of a compact set in ℂ^m.
///
/// `mesh` is an upper bound for the distance from any point of the sampled set
/// to the nearest sample, so every distance computed on samples carries an
/// error of at most `2 * mesh`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CompactJson", into = "CompactJson")]
pub struct SampledCompact {
    m: usize,
    points: Vec<Vec<Complex>>,
    ambient_diam: Option<f64>,
    shape: Option<StandardSet>,
    mesh: f64,
}

impl SampledCompact {
    pub fn new(m: usize, points: Vec<Vec<Complex>>, mesh: f64) -> Result<Self, SetError> {
        if points.is_empty() {
            return Err(SetError::EmptySample);
        }
        Self::checked(m, points, mesh)
    }

    fn checked(m: usize, points: Vec<Vec<Complex>>, mesh: f64) -> Result<Self, SetError> {
        if !(mesh.is_finite() && mesh >= 0.0) {
            return Err(SetError::Invalid(format!("mesh {mesh} must be finite and >= 0")));
        }
        if let Some(p) = points.iter().find(|p| p.len() != m) {
            return Err(SetError::DimensionMismatch {
                expected: m,
                found: p.len(),
            });
        }
        if points
            .iter()
            .flatten()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(SetError::Invalid("non-finite sample point".into()));
        }
        Ok(Self {
            m,
            points,
            ambient_diam: None,
            shape: None,
            mesh,
        })
    }

    /// The empty subset of ℂ^m.
    pub fn empty(m: usize) -> Self {
        Self {
            m,
            points: Vec::new(),
            ambient_diam: None,
            shape: None,
            mesh: 0.0,
        }
    }

    /// Points of ℂ given as a list, `m = 1`.
    pub fn from_complex(points: &[Complex], mesh: f64) -> Result<Self, SetError> {
        Self::new(1, points.iter().map(|&z| vec![z]).collect(), mesh)
    }

    /// `count` equally spaced samples of the real segment `[a, b]`, endpoints included.
    pub fn segment(a: f64, b: f64, count: usize) -> Result<Self, SetError> {
        let shape = StandardSet::Segment { a, b };
        shape.validate()?;
        if count < 2 {
            return Err(SetError::Invalid("a segment needs at least 2 samples".into()));
        }
        let step = (b - a) / (count - 1) as f64;
        let points = (0..count)
            .map(|i| {
                let x = if i + 1 == count { b } else { a + step * i as f64 };
                vec![Complex::new(x, 0.0)]
            })
            .collect();
        let mut k = Self::new(1, points, step / 2.0)?;
        k.shape = Some(shape);
        k.ambient_diam = Some(b - a);
        Ok(k)
    }

    /// Square grid of the closed disc plus a ring of boundary samples.
    pub fn disc(center: Complex, radius: f64, spacing: f64) -> Result<Self, SetError> {
        let shape = StandardSet::Disc {
            center: [center.re, center.im],
            radius,
        };
        shape.validate()?;
        check_spacing(spacing)?;
        let points: Vec<Vec<Complex>> = disc_points(center, radius, spacing)
            .into_iter()
            .map(|z| vec![z])
            .collect();
        // interior cells contribute s/sqrt(2); cells cut by the circle are
        // within s*sqrt(2) of the ring, whose samples are s/2 apart in arc
        let mut k = Self::new(1, points, spacing * (std::f64::consts::SQRT_2 + 0.5))?;
        k.shape = Some(shape);
        k.ambient_diam = Some(2.0 * radius);
        Ok(k)
    }

    /// Samples of any [`StandardSet`] at the given spacing.
    pub fn sample(shape: &StandardSet, spacing: f64) -> Result<Self, SetError> {
        shape.validate()?;
        check_spacing(spacing)?;
        let mut k = match shape {
            StandardSet::Segment { a, b } => {
                let count = ((b - a) / spacing - 1e-9).ceil() as usize + 1;
                return Self::segment(*a, *b, count.max(2));
            }
            StandardSet::Disc { center, radius } => {
                return Self::disc(Complex::new(center[0], center[1]), *radius, spacing)
            }
            StandardSet::Box { lo, hi } => {
                let factors = lo
                    .iter()
                    .zip(hi)
                    .map(|(&a, &b)| Self::sample(&StandardSet::Segment { a, b }, spacing))
                    .collect::<Result<Vec<_>, _>>()?;
                Self::product(&factors)?
            }
            StandardSet::Polydisc { radii } => {
                let factors = radii
                    .iter()
                    .map(|&r| Self::disc(Complex::new(0.0, 0.0), r, spacing))
                    .collect::<Result<Vec<_>, _>>()?;
                Self::product(&factors)?
            }
            StandardSet::Product { factors } => {
                let factors = factors
                    .iter()
                    .map(|f| Self::sample(f, spacing))
                    .collect::<Result<Vec<_>, _>>()?;
                Self::product(&factors)?
            }
        };
        k.shape = Some(shape.clone());
        Ok(k)
    }

    /// Cartesian product of samples; the mesh is the Euclidean combination of the factor meshes.
    pub fn product(factors: &[SampledCompact]) -> Result<Self, SetError> {
        if factors.is_empty() || factors.iter().any(|f| f.points.is_empty()) {
            return Err(SetError::EmptySample);
        }
        let mut points: Vec<Vec<Complex>> = vec![Vec::new()];
        for f in factors {
            points = points
                .iter()
                .flat_map(|p| {
                    f.points.iter().map(move |q| {
                        let mut r = p.clone();
                        r.extend_from_slice(q);
                        r
                    })
                })
                .collect();
        }
        let m = factors.iter().map(|f| f.m).sum();
        let mesh = factors.iter().map(|f| f.mesh * f.mesh).sum::<f64>().sqrt();
        let mut k = Self::new(m, points, mesh)?;
        if factors.iter().all(|f| f.shape.is_some()) {
            k.shape = Some(StandardSet::Product {
                factors: factors.iter().map(|f| f.shape.clone().unwrap()).collect(),
            });
        }
        k.ambient_diam = factors
            .iter()
            .map(|f| f.ambient_diam.map(|d| d * d))
            .sum::<Option<f64>>()
            .map(f64::sqrt);
        Ok(k)
    }

    /// `count` equally spaced points on a circle. Not polynomially convex, so untagged.
    pub fn circle(center: Complex, radius: f64, count: usize) -> Result<Self, SetError> {
        let pts: Vec<Complex> = (0..count)
            .map(|k| {
                center
                    + Complex::from_polar(
                        radius,
                        2.0 * std::f64::consts::PI * k as f64 / count as f64,
                    )
            })
            .collect();
        let mesh = radius * (std::f64::consts::PI / count as f64);
        Self::from_complex(&pts, mesh)
    }

    pub fn with_ambient_diam(mut self, d: f64) -> Self {
        self.ambient_diam = Some(d);
        self
    }

    pub fn with_shape(mut self, shape: StandardSet) -> Self {
        self.shape = Some(shape);
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn points(&self) -> &[Vec<Complex>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn shape(&self) -> Option<&StandardSet> {
        self.shape.as_ref()
    }

    pub fn ambient_diam(&self) -> Option<f64> {
        self.ambient_diam
    }

    /// Points as real `2m`-vectors `[re x_1, im x_1, ..., re x_m, im x_m]`.
    pub fn cloud(&self) -> PointCloud {
        let mut c = PointCloud::new(2 * self.m);
        for p in &self.points {
            c.push_complex(p);
        }
        c
    }

    /// Extended Hausdorff distance to another sample of a subset of ℂ^m.
    pub fn hausdorff(&self, other: &Self) -> Result<f64, SetError> {
        if self.m != other.m {
            return Err(SetError::DimensionMismatch {
                expected: self.m,
                found: other.m,
            });
        }
        super::hausdorff(
            &self.cloud(),
            &other.cloud(),
            self.ambient_diam.or(other.ambient_diam),
        )
    }

    /// Samples of a complex neighbourhood `U ⊃ K`: the sample dilated by
    /// `factor` about the centre of its bounding box, thickened in the imaginary
    /// direction of every coordinate along which `K` is real.
    pub fn neighborhood(&self, factor: f64) -> Result<Self, SetError> {
        if self.points.is_empty() {
            return Err(SetError::EmptySample);
        }
        if !(factor.is_finite() && factor >= 1.0) {
            return Err(SetError::Invalid(format!("dilation factor {factor} must be >= 1")));
        }
        let m = self.m;
        let mut center = vec![Complex::new(0.0, 0.0); m];
        let mut radius = vec![0.0f64; m];
        let mut real = vec![true; m];
        for v in 0..m {
            let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) =
                (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for p in &self.points {
                lo_re = lo_re.min(p[v].re);
                hi_re = hi_re.max(p[v].re);
                lo_im = lo_im.min(p[v].im);
                hi_im = hi_im.max(p[v].im);
            }
            center[v] = Complex::new((lo_re + hi_re) / 2.0, (lo_im + hi_im) / 2.0);
            radius[v] = ((hi_re - lo_re).hypot(hi_im - lo_im) / 2.0).max(f64::MIN_POSITIVE);
            real[v] = hi_im - lo_im <= 1e-12 * (1.0 + radius[v]);
        }
        let mut points = Vec::new();
        for p in &self.points {
            let dilated: Vec<Complex> = p
                .iter()
                .zip(&center)
                .map(|(z, c)| c + (z - c) * factor)
                .collect();
            let mut variants = vec![dilated];
            for v in 0..m {
                if real[v] {
                    let eps = (factor - 1.0) * radius[v];
                    variants = variants
                        .into_iter()
                        .flat_map(|q| {
                            [-1.0, 0.0, 1.0].into_iter().map(move |s| {
                                let mut r = q.clone();
                                r[v] += Complex::new(0.0, s * eps);
                                r
                            })
                        })
                        .collect();
                }
            }
            points.extend(variants);
        }
        Self::new(m, points, self.mesh * factor)
    }
}

fn check_spacing(s: f64) -> Result<(), SetError> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(SetError::Invalid(format!("spacing {s} must be positive")))
    }
}

fn disc_points(center: Complex, radius: f64, spacing: f64) -> Vec<Complex> {
    let k = (radius / spacing).floor() as i64;
    let mut pts = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            let z = Complex::new(i as f64 * spacing, j as f64 * spacing);
            if z.norm() <= radius {
                pts.push(center + z);
            }
        }
    }
    let ring = ((2.0 * std::f64::consts::PI * radius / spacing).ceil() as usize).max(8);
    for k in 0..ring {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / ring as f64;
        pts.push(center + Complex::from_polar(radius, angle));
    }
    pts
}

/// Wire form: `{"m": …, "points": [[re, im, …], …], "mesh": …, "ambient_diam": …, "shape": …}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct CompactJson {
    pub m: usize,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_diam: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<StandardSet>,
}

pub(super) fn decode_points(m: usize, raw: &[Vec<f64>]) -> Result<Vec<Vec<Complex>>, SetError> {
    raw.iter()
        .map(|r| {
            if r.len() != 2 * m {
                return Err(SetError::DimensionMismatch {
                    expected: 2 * m,
                    found: r.len(),
                });
            }
            Ok(r.chunks(2).map(|c| Complex::new(c[0], c[1])).collect())
        })
        .collect()
}

pub(super) fn encode_points(points: &[Vec<Complex>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| p.iter().flat_map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Half the largest nearest-neighbour gap: a stand-in mesh for samples read
/// from files that do not declare one.
pub(super) fn estimated_mesh(points: &[Vec<Complex>]) -> f64 {
    let cloud = {
        let mut c = PointCloud::new(points.first().map_or(0, |p| 2 * p.len()));
        for p in points {
            c.push_complex(p);
        }
        c
    };
    if cloud.len() < 2 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..cloud.len() {
        let mut best = f64::INFINITY;
        for j in 0..cloud.len() {
            if i != j {
                best = best.min(super::hausdorff::dist(cloud.point(i), cloud.point(j)));
            }
        }
        worst = worst.max(best);
    }
    worst / 2.0
}

impl TryFrom<CompactJson> for SampledCompact {
    type Error = SetError;

    fn try_from(j: CompactJson) -> Result<Self, SetError> {
        let points = decode_points(j.m, &j.points)?;
        let mesh = j.mesh.unwrap_or_else(|| estimated_mesh(&points));
        let mut k = Self::checked(j.m, points, mesh)?;
        k.ambient_diam = j.ambient_diam;
        if let Some(shape) = j.shape {
            shape.validate()?;
            k.shape = Some(shape);
        }
        Ok(k)
    }
}

impl From<SampledCompact> for CompactJson {
    fn from(k: SampledCompact) -> Self {
        CompactJson {
            m: k.m,
            points: encode_points(&k.points),
            mesh: Some(k.mesh),
            ambient_diam: k.ambient_diam,
            shape: k.shape,
        }
    }
}
