//! Closed-form Siciak extremal functions of standard polynomially convex sets.
//!
//! Only the catalogue below is supported: closed discs, real segments, real
//! boxes, polydiscs centred at the origin and finite products of these. The
//! formulas are the classical ones:
//!
//! * disc `|z - c| <= ρ`: `Φ(z) = max(1, |z - c| / ρ)`;
//! * segment `[-1, 1]`: `Φ(z) = |z + sqrt(z^2 - 1)|` with the branch giving `Φ >= 1`,
//!   pulled back affinely for `[a, b]`;
//! * products (boxes and polydiscs included): the maximum over the factors.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::sets::SampledCompact;
use crate::Complex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtremalError {
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("point has dimension {found}, set has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("probe radius h = {h} must be at least twice the grid mesh {mesh}")]
    ProbeTooFine { h: f64, mesh: f64 },
}

/// A compact set from the supported catalogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StandardSet {
    /// Closed disc in ℂ; `center` is `[re, im]`.
    Disc { center: [f64; 2], radius: f64 },
    /// Real segment `[a, b] ⊂ ℝ ⊂ ℂ`.
    Segment { a: f64, b: f64 },
    /// Real box `∏ [lo_i, hi_i] ⊂ ℝ^m ⊂ ℂ^m`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Polydisc centred at the origin with the given radii.
    Polydisc { radii: Vec<f64> },
    Product { factors: Vec<StandardSet> },
}

impl StandardSet {
    pub fn unit_disc() -> Self {
        StandardSet::Disc {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }

    pub fn unit_segment() -> Self {
        StandardSet::Segment { a: -1.0, b: 1.0 }
    }

    /// Number of complex variables.
    pub fn dim(&self) -> usize {
        match self {
            StandardSet::Disc { .. } | StandardSet::Segment { .. } => 1,
            StandardSet::Box { lo, .. } => lo.len(),
            StandardSet::Polydisc { radii } => radii.len(),
            StandardSet::Product { factors } => factors.iter().map(StandardSet::dim).sum(),
        }
    }

    pub fn validate(&self) -> Result<(), ExtremalError> {
        let bad = |m: String| Err(ExtremalError::InvalidSet(m));
        match self {
            StandardSet::Disc { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.iter().all(|c| c.is_finite())
                {
                    return bad(format!("disc radius {radius} must be positive and finite"));
                }
            }
            StandardSet::Segment { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return bad(format!("segment [{a}, {b}] must satisfy a < b"));
                }
            }
            StandardSet::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return bad("box bounds must be nonempty and of equal length".into());
                }
                if let Some(i) = (0..lo.len()).find(|&i| !(lo[i].is_finite() && lo[i] < hi[i])) {
                    return bad(format!("box side {i}: [{}, {}]", lo[i], hi[i]));
                }
            }
            StandardSet::Polydisc { radii } => {
                if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                    return bad("polydisc radii must be positive".into());
                }
            }
            StandardSet::Product { factors } => {
                if factors.is_empty() {
                    return bad("product needs at least one factor".into());
                }
                for f in factors {
                    f.validate()?;
                }
            }
        }
        Ok(())
    }
}

/// `Φ` of `[-1, 1]`.
fn phi_unit_segment(w: Complex) -> f64 {
    let s = (w * w - 1.0).sqrt();
    (w + s).norm().max((w - s).norm()).max(1.0)
}

fn phi_segment(a: f64, b: f64, z: Complex) -> f64 {
    let w = (2.0 * z - (a + b)) / (b - a);
    phi_unit_segment(w)
}

/// Siciak extremal function `Φ_S(z)`; always `>= 1`, and `= 1` on `S`.
pub fn siciak_phi(set: &StandardSet, z: &[Complex]) -> Result<f64, ExtremalError> {
    set.validate()?;
    if z.len() != set.dim() {
        return Err(ExtremalError::DimensionMismatch {
            expected: set.dim(),
            found: z.len(),
        });
    }
    Ok(phi_unchecked(set, z))
}

fn phi_unchecked(set: &StandardSet, z: &[Complex]) -> f64 {
    match set {
        StandardSet::Disc { center, radius } => {
            let c = Complex::new(center[0], center[1]);
            ((z[0] - c).norm() / radius).max(1.0)
        }
        StandardSet::Segment { a, b } => phi_segment(*a, *b, z[0]),
        StandardSet::Box { lo, hi } => z
            .iter()
            .enumerate()
            .map(|(i, &zi)| phi_segment(lo[i], hi[i], zi))
            .fold(1.0, f64::max),
        StandardSet::Polydisc { radii } => z
            .iter()
            .zip(radii)
            .map(|(zi, r)| zi.norm() / r)
            .fold(1.0, f64::max),
        StandardSet::Product { factors } => {
            let mut offset = 0;
            let mut best = 1.0f64;
            for f in factors {
                let d = f.dim();
                best = best.max(phi_unchecked(f, &z[offset..offset + d]));
                offset += d;
            }
            best
        }
    }
}

/// Largest `|Φ(z) - Φ(z')|` over grid pairs with `|z - z'| <= h`.
///
/// A numeric modulus of continuity of `Φ` at scale `h`; it should shrink to
/// zero with `h` for every supported set.
pub fn continuity_probe(
    set: &StandardSet,
    grid: &SampledCompact,
    h: f64,
) -> Result<f64, ExtremalError> {
    set.validate()?;
    if grid.m() != set.dim() {
        return Err(ExtremalError::DimensionMismatch {
            expected: set.dim(),
            found: grid.m(),
        });
    }
    if h < 2.0 * grid.mesh() {
        return Err(ExtremalError::ProbeTooFine {
            h,
            mesh: grid.mesh(),
        });
    }
    let coords: Vec<Vec<f64>> = grid.points().iter().map(|p| realify(p)).collect();
    let phis: Vec<f64> = grid
        .points()
        .iter()
        .map(|p| phi_unchecked(set, p))
        .collect();

    // uniform hash grid with cell side h: neighbours lie in adjacent cells
    let cell = |x: &[f64]| -> Vec<i64> { x.iter().map(|v| (v / h).floor() as i64).collect() };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, x) in coords.iter().enumerate() {
        buckets.entry(cell(x)).or_default().push(i);
    }
    let dim = coords.first().map_or(0, Vec::len);
    let offsets = neighbour_offsets(dim);
    let mut worst = 0.0f64;
    for (i, x) in coords.iter().enumerate() {
        let base = cell(x);
        for off in &offsets {
            let key: Vec<i64> = base.iter().zip(off).map(|(b, o)| b + o).collect();
            if let Some(bucket) = buckets.get(&key) {
                for &j in bucket {
                    if j > i && dist(x, &coords[j]) <= h {
                        worst = worst.max((phis[i] - phis[j]).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn realify(p: &[Complex]) -> Vec<f64> {
    p.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn neighbour_offsets(dim: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-1..=1).map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    /// `lim |T_{d+1}(z)| / |T_d(z)|` from the three-term recurrence.
    fn chebyshev_ratio(z: Complex, d: usize) -> f64 {
        let (mut t0, mut t1) = (c(1.0, 0.0), z);
        for _ in 1..d {
            let t2 = 2.0 * z * t1 - t0;
            t0 = t1;
            t1 = t2;
        }
        let t2 = 2.0 * z * t1 - t0;
        t2.norm() / t1.norm()
    }

    #[test]
    fn disc_is_one_at_centre() {
        assert_eq!(siciak_phi(&StandardSet::unit_disc(), &[c(0.0, 0.0)]).unwrap(), 1.0);
        assert_eq!(siciak_phi(&StandardSet::unit_disc(), &[c(0.0, 3.0)]).unwrap(), 3.0);
    }

    #[test]
    fn segment_at_two() {
        let phi = siciak_phi(&StandardSet::unit_segment(), &[c(2.0, 0.0)]).unwrap();
        let oracle = chebyshev_ratio(c(2.0, 0.0), 30);
        assert!((phi - (2.0 + 3f64.sqrt())).abs() < 1e-12);
        assert!((phi - oracle).abs() < 1e-6);
        // and on the negative side / off axis the branch still gives >= 1
        let phi = siciak_phi(&StandardSet::unit_segment(), &[c(-2.0, 0.0)]).unwrap();
        assert!((phi - (2.0 + 3f64.sqrt())).abs() < 1e-12);
        let z = c(0.3, -0.7);
        let phi = siciak_phi(&StandardSet::unit_segment(), &[z]).unwrap();
        assert!((phi - chebyshev_ratio(z, 60)).abs() < 1e-9);
    }

    #[test]
    fn segment_pullback() {
        let s = StandardSet::Segment { a: 0.0, b: 4.0 };
        let phi = siciak_phi(&s, &[c(6.0, 0.0)]).unwrap();
        assert!((phi - (2.0 + 3f64.sqrt())).abs() < 1e-12);
        assert_eq!(siciak_phi(&s, &[c(1.0, 0.0)]).unwrap(), 1.0);
    }

    #[test]
    fn polydisc_interior() {
        let s = StandardSet::Polydisc {
            radii: vec![1.0, 2.0],
        };
        assert_eq!(siciak_phi(&s, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap(), 1.0);
        assert_eq!(siciak_phi(&s, &[c(0.5, 0.0), c(6.0, 0.0)]).unwrap(), 3.0);
    }

    #[test]
    fn product_is_max_of_factors() {
        let s = StandardSet::Product {
            factors: vec![StandardSet::unit_disc(), StandardSet::unit_segment()],
        };
        let z = [c(1.5, 0.0), c(2.0, 0.0)];
        let want = (1.5f64).max(2.0 + 3f64.sqrt());
        assert_eq!(siciak_phi(&s, &z).unwrap(), want);
    }

    #[test]
    fn chebyshev_growth_is_dominated() {
        for z in [c(2.0, 0.0), c(0.1, 0.5), c(-1.3, 1.1), c(0.9, 0.0)] {
            let phi = siciak_phi(&StandardSet::unit_segment(), &[z]).unwrap();
            let (mut t0, mut t1) = (c(1.0, 0.0), z);
            for d in 2..=25 {
                let t2 = 2.0 * z * t1 - t0;
                t0 = t1;
                t1 = t2;
                assert!(t1.norm().powf(1.0 / d as f64) <= phi + 0.01);
            }
        }
    }

    #[test]
    fn invalid_sets_and_dimensions() {
        let bad = StandardSet::Disc {
            center: [0.0, 0.0],
            radius: -1.0,
        };
        assert!(matches!(
            siciak_phi(&bad, &[c(0.0, 0.0)]),
            Err(ExtremalError::InvalidSet(_))
        ));
        assert!(matches!(
            siciak_phi(&StandardSet::unit_disc(), &[c(0.0, 0.0), c(1.0, 0.0)]),
            Err(ExtremalError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn shape_json() {
        let s: StandardSet =
            serde_json::from_str(r#"{"product":{"factors":[{"segment":{"a":-1,"b":1}},{"disc":{"center":[0,0],"radius":2}}]}}"#)
                .unwrap();
        assert_eq!(s.dim(), 2);
        assert!(serde_json::from_str::<StandardSet>(r#"{"annulus":{"r":1}}"#).is_err());
    }
}
