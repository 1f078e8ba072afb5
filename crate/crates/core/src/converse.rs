//! Reconstruction of pseudopolynomial coefficients from algebraic multigraphs
//! that converge geometrically in the fiberwise metric.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{vieta_from_roots, AlgebraError, Polynomial, Pseudopolynomial};
use crate::chebyshev::{best_approx, BasisExpansion, ChebError, Mode};
use crate::forward::DELTA_FLOOR;
use crate::roots::{match_roots, RootError, RELAXED_TOL};
use crate::sets::{fit_geometric_rate, fit_geometric_rate_with_floor, Multigraph, RateFit, SetError};
use crate::Complex;

/// Margin added to the largest fiber modulus to get `R`.
pub const R_MARGIN: f64 = 0.1;
/// Dilation of `K` for the neighbourhood on which the extension is witnessed.
pub const NEIGHBORHOOD_FACTOR: f64 = 1.1;
/// Allowance in `theta_j <= theta_delta + COEFF_RATE_SLACK`.
pub const COEFF_RATE_SLACK: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConverseError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("covering number violated at degree {d}, sample {index}: {reason}")]
    CoveringNumber { d: u32, index: usize, reason: String },
    #[error("fiber {index} has {found} points, expected {expected}")]
    FiberSize {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Approx(#[from] ChebError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Root(#[from] RootError),
}

/// Constants bounding differences of products and of elementary symmetric
/// functions of perturbed roots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaConstants {
    pub n: usize,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub r: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// `C_1 .. C_n` at perturbation `r`.
    pub c: Vec<f64>,
    /// `D_1 .. D_n`, built from the `C_k` at perturbation `M`.
    pub d: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn c_sequence(n: usize, big_r: f64, r: f64) -> Vec<f64> {
    let mut c = vec![1.0];
    for k in 2..=n {
        let prev = c[k - 2];
        c.push(big_r.powi(k as i32 - 1) + (r + big_r) * prev);
    }
    c
}

/// `C_1 = 1`, `C_k = R^{k-1} + (r + R) C_{k-1}`; `D_1 = n`,
/// `D_k = binom(n, k) (R^{k-1} + (M + R) C_{k-1}|_{r = M})`.
pub fn product_bound_constants(
    n: usize,
    big_r: f64,
    r: f64,
    m: f64,
) -> Result<LemmaConstants, ConverseError> {
    if n == 0 || !(big_r > 0.0) || !(r > 0.0) || !(m >= 0.0) {
        return Err(ConverseError::Precondition(format!(
            "need n >= 1, R > 0, r > 0, M >= 0; got n={n}, R={big_r}, r={r}, M={m}"
        )));
    }
    let c = c_sequence(n, big_r, r);
    let cm = c_sequence(n, big_r, m);
    let d = (1..=n)
        .map(|k| {
            if k == 1 {
                n as f64
            } else {
                binomial(n, k) * (big_r.powi(k as i32 - 1) + (m + big_r) * cm[k - 2])
            }
        })
        .collect();
    Ok(LemmaConstants {
        n,
        big_r,
        r,
        m,
        c,
        d,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub n: usize,
    pub x0: usize,
    /// Radius of the disjoint discs around the fiber points at `x0`.
    pub radius: f64,
}

/// Smallest pairwise distance within a fiber.
fn min_gap(fiber: &[Complex]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..fiber.len() {
        for j in i + 1..fiber.len() {
            g = g.min((fiber[i] - fiber[j]).norm());
        }
    }
    g
}

/// Confirms that the tail of `w_seq` has covering number `n_expected`.
///
/// Every fiber of every multigraph in the later half of the sequence must have
/// at most `n_expected` points, and at `x0` the last multigraph must have
/// `n_expected` distinct points whose discs of radius (min gap)/3 each catch
/// exactly one point of every tail fiber. Without `x0`, the sample point with
/// the best-separated fiber is used.
pub fn detect_covering_number(
    w_seq: &[(u32, Multigraph)],
    n_expected: usize,
    x0: Option<usize>,
) -> Result<CoveringReport, ConverseError> {
    let (d_last, last) = w_seq
        .last()
        .ok_or_else(|| ConverseError::Precondition("empty multigraph sequence".into()))?;
    let tail = &w_seq[w_seq.len() / 2..];
    for (d, w) in tail {
        for (i, f) in w.fibers().iter().enumerate() {
            if f.len() > n_expected {
                return Err(ConverseError::CoveringNumber {
                    d: *d,
                    index: i,
                    reason: format!("{} fiber points, expected at most {n_expected}", f.len()),
                });
            }
        }
    }
    let x0 = match x0 {
        Some(i) if i < last.fibers().len() => i,
        Some(i) => {
            return Err(ConverseError::Precondition(format!("x0 = {i} is not a sample index")))
        }
        None => (0..last.fibers().len())
            .filter(|&i| !last.is_flagged(i) && last.fiber(i).len() == n_expected)
            .max_by(|&i, &j| min_gap(last.fiber(i)).total_cmp(&min_gap(last.fiber(j))))
            .ok_or(ConverseError::CoveringNumber {
                d: *d_last,
                index: 0,
                reason: format!("no fiber with {n_expected} points"),
            })?,
    };
    let reference = last.fiber(x0);
    let scale = reference.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let gap = if reference.len() < 2 { scale } else { min_gap(reference) };
    // a computed double root splits by about sqrt(eps) * scale
    if reference.len() != n_expected || gap <= RELAXED_TOL * scale {
        return Err(ConverseError::CoveringNumber {
            d: *d_last,
            index: x0,
            reason: format!(
                "fiber has {} points with minimal gap {gap:.3e}; not {n_expected} separated points",
                reference.len()
            ),
        });
    }
    let radius = gap / 3.0;
    for (d, w) in tail {
        let fiber = w.fiber(x0);
        for (c, centre) in reference.iter().enumerate() {
            let inside = fiber.iter().filter(|z| (*z - centre).norm() < radius).count();
            if inside != 1 {
                return Err(ConverseError::CoveringNumber {
                    d: *d,
                    index: x0,
                    reason: format!("disc {c} of radius {radius:.3e} holds {inside} points"),
                });
            }
        }
    }
    Ok(CoveringReport {
        n: n_expected,
        x0,
        radius,
    })
}

/// Vieta coefficients `(a_1, ..., a_n)` of every fiber, by sample point.
pub fn reconstruct_coefficients(w: &Multigraph, n: usize) -> Result<Vec<Vec<Complex>>, ConverseError> {
    w.fibers()
        .iter()
        .enumerate()
        .map(|(index, f)| {
            if f.len() != n {
                return Err(ConverseError::FiberSize {
                    index,
                    found: f.len(),
                    expected: n,
                });
            }
            Ok(vieta_from_roots(f))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConverseVerdict {
    HolomorphicWitness,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverseRecord {
    pub d: u32,
    pub delta: f64,
    /// Largest bottleneck distance between matched fibers of `Y` and `W_d`.
    pub matching_radius: f64,
    /// `max_x |a_j(x) - a_{j,d}(x)|` for every `j`.
    pub coeff_sup_errors: Vec<f64>,
    /// Whether every coefficient error obeys the product bound `D_k r_d`.
    pub lemma_ok: bool,
    /// Least-squares polynomial fits of degree `d` to the Vieta coefficients.
    pub coeff_polys: Vec<Polynomial>,
    pub coeff_expansions: Vec<BasisExpansion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverseResult {
    pub n_detected: usize,
    pub covering: CoveringReport,
    pub fit_delta: RateFit,
    pub records: Vec<ConverseRecord>,
    pub lemma: LemmaConstants,
    pub fits: Vec<RateFit>,
    /// `theta_j <= theta_delta + COEFF_RATE_SLACK` for all `j`.
    pub coeff_rate_envelope: bool,
    /// Fits on every other degree only.
    pub sqrt_theta_fits: Vec<RateFit>,
    pub sqrt_theta_geometric: bool,
    /// Decay of `sup_U |a_{j,d} - a_{j,d_max}|` on the dilated neighbourhood `U`.
    pub cauchy_fits: Vec<RateFit>,
    pub cauchy_geometric: bool,
    pub verdict: ConverseVerdict,
    /// Coefficient polynomials at the largest degree, when the verdict is positive.
    pub reconstructed: Option<Pseudopolynomial>,
    /// Vieta coefficients of the last multigraph, by coefficient then sample.
    pub reconstructed_samples: Vec<Vec<Complex>>,
}

/// Runs the converse pipeline on `W_d` (paired with their degrees) against `Y`.
///
/// `delta_seq[i]` is the observed `δ_K(Y, W_{d_i})`; it must fit a geometric
/// rate, otherwise nothing is reconstructed.
pub fn converse_experiment(
    y: &Multigraph,
    w_seq: &[(u32, Multigraph)],
    n: usize,
    delta_seq: &[f64],
    x0: Option<usize>,
) -> Result<ConverseResult, ConverseError> {
    if w_seq.len() != delta_seq.len() {
        return Err(ConverseError::Precondition(format!(
            "{} multigraphs but {} distances",
            w_seq.len(),
            delta_seq.len()
        )));
    }
    let ds: Vec<u32> = w_seq.iter().map(|(d, _)| *d).collect();
    let fit_delta = fit_geometric_rate_with_floor(
        &ds.iter().copied().zip(delta_seq.iter().copied()).collect::<Vec<_>>(),
        DELTA_FLOOR,
    );
    if !fit_delta.is_geometric() {
        return Err(ConverseError::Precondition(format!(
            "the distances to Y do not decay geometrically (verdict {:?}, theta {:.4})",
            fit_delta.verdict, fit_delta.theta
        )));
    }
    let covering = detect_covering_number(w_seq, n, x0)?;
    let k = y.base();
    let a_y = reconstruct_coefficients(y, n)?;

    let big_r = y
        .fibers()
        .iter()
        .chain(w_seq.iter().flat_map(|(_, w)| w.fibers()))
        .flatten()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        + R_MARGIN;

    struct Partial {
        coeffs: Vec<Vec<Complex>>,
        radius: f64,
        errors: Vec<f64>,
    }
    let partial: Vec<Partial> = w_seq
        .par_iter()
        .map(|(_, w)| {
            if w.base().points() != k.points() {
                return Err(ConverseError::Set(SetError::BaseMismatch));
            }
            let coeffs = reconstruct_coefficients(w, n)?;
            let mut radius = 0.0f64;
            let mut errors = vec![0.0f64; n];
            for i in 0..coeffs.len() {
                if y.is_flagged(i) || w.is_flagged(i) {
                    continue;
                }
                radius = radius.max(match_roots(y.fiber(i), w.fiber(i))?.bottleneck);
                for j in 0..n {
                    errors[j] = errors[j].max((a_y[i][j] - coeffs[i][j]).norm());
                }
            }
            Ok(Partial {
                coeffs,
                radius,
                errors,
            })
        })
        .collect::<Result<_, ConverseError>>()?;

    let m_env = partial.iter().map(|p| p.radius).fold(f64::MIN_POSITIVE, f64::max);
    let lemma = product_bound_constants(n, big_r, m_env, m_env)?;

    let mut records = Vec::with_capacity(ds.len());
    for (idx, p) in partial.iter().enumerate() {
        let d = ds[idx];
        let lemma_ok = p.errors.iter().enumerate().all(|(j, &e)| {
            let k1 = j + 1;
            let c_r = c_sequence(n, big_r, p.radius);
            let bound = binomial(n, k1) * c_r[j] * p.radius;
            // Vieta products carry their own rounding, of order eps R^k per term
            let rounding = 8.0 * f64::EPSILON * binomial(n, k1) * (k1 as f64) * big_r.powi(k1 as i32);
            e <= bound * (1.0 + 1e-9) + rounding && bound <= lemma.d[j] * p.radius * (1.0 + 1e-12)
        });
        let mut coeff_polys = Vec::with_capacity(n);
        let mut coeff_expansions = Vec::with_capacity(n);
        for j in 0..n {
            let values: Vec<Complex> = p.coeffs.iter().map(|c| c[j]).collect();
            let fit = best_approx(k, &values, d, Mode::LeastSquares)?;
            coeff_polys.push(fit.poly);
            coeff_expansions.push(fit.expansion);
        }
        records.push(ConverseRecord {
            d,
            delta: delta_seq[idx],
            matching_radius: p.radius,
            coeff_sup_errors: p.errors.clone(),
            lemma_ok,
            coeff_polys,
            coeff_expansions,
        });
    }

    let series = |j: usize, every: usize| -> Vec<(u32, f64)> {
        records
            .iter()
            .enumerate()
            .filter(|(i, _)| i % every == 0)
            .map(|(_, r)| (r.d, r.coeff_sup_errors[j]))
            .collect()
    };
    let fits: Vec<RateFit> = (0..n).map(|j| fit_geometric_rate(&series(j, 1))).collect();
    let sqrt_theta_fits: Vec<RateFit> = (0..n).map(|j| fit_geometric_rate(&series(j, 2))).collect();
    let coeff_rate_envelope = fits
        .iter()
        .all(|f| f.theta.is_nan() || f.theta <= fit_delta.theta + COEFF_RATE_SLACK);
    let sqrt_theta_geometric = sqrt_theta_fits.iter().all(RateFit::is_geometric);

    let u = k.neighborhood(NEIGHBORHOOD_FACTOR)?;
    let last = records.last().expect("nonempty sequence");
    let cauchy_fits: Vec<RateFit> = (0..n)
        .map(|j| {
            let top = &last.coeff_expansions[j];
            let diffs: Vec<(u32, f64)> = records[..records.len() - 1]
                .iter()
                .map(|r| {
                    let e = &r.coeff_expansions[j];
                    let sup = u
                        .points()
                        .iter()
                        .map(|x| (e.eval(x) - top.eval(x)).norm())
                        .fold(0.0, f64::max);
                    (r.d, sup)
                })
                .collect();
            fit_geometric_rate(&diffs)
        })
        .collect();
    let cauchy_geometric = cauchy_fits.iter().all(RateFit::is_geometric);

    let verdict = if fits.iter().all(RateFit::is_geometric) {
        ConverseVerdict::HolomorphicWitness
    } else {
        ConverseVerdict::Rejected
    };
    let reconstructed = match verdict {
        ConverseVerdict::HolomorphicWitness => {
            Some(Pseudopolynomial::from_polynomials(last.coeff_polys.clone())?)
        }
        ConverseVerdict::Rejected => None,
    };
    let last_coeffs = &partial.last().expect("nonempty sequence").coeffs;
    let reconstructed_samples = (0..n)
        .map(|j| last_coeffs.iter().map(|c| c[j]).collect())
        .collect();

    Ok(ConverseResult {
        n_detected: covering.n,
        covering,
        fit_delta,
        records,
        lemma,
        fits,
        coeff_rate_envelope,
        sqrt_theta_fits,
        sqrt_theta_geometric,
        cauchy_fits,
        cauchy_geometric,
        verdict,
        reconstructed,
        reconstructed_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::SampledCompact;

    #[test]
    fn constants_small_cases() {
        let c = product_bound_constants(1, 2.0, 0.5, 1.0).unwrap();
        assert_eq!(c.c, vec![1.0]);
        assert_eq!(c.d, vec![1.0]);
        let c = product_bound_constants(2, 3.0, 0.5, 0.5).unwrap();
        assert_eq!(c.c, vec![1.0, 6.5]);
        assert_eq!(c.d, vec![2.0, 6.5]);
        assert!(product_bound_constants(2, 0.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn constant_fibers_reconstruct() {
        let k = SampledCompact::segment(0.0, 1.0, 4).unwrap();
        let w = Multigraph::new(
            k,
            vec![vec![Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0)]; 4],
            2,
        )
        .unwrap();
        for c in reconstruct_coefficients(&w, 2).unwrap() {
            assert_eq!(c, vec![Complex::new(0.0, 0.0), Complex::new(-1.0, 0.0)]);
        }
        assert!(matches!(
            reconstruct_coefficients(&w, 3),
            Err(ConverseError::FiberSize { expected: 3, .. })
        ));
    }

    fn two_branch(k: &SampledCompact, shift: f64, extra: bool) -> Multigraph {
        let fibers = k
            .points()
            .iter()
            .map(|x| {
                let t = x[0].re;
                let mut f = vec![Complex::new(t + shift, 0.0), Complex::new(-t, 0.0)];
                if extra {
                    f.push(Complex::new(5.0, 0.0));
                }
                f
            })
            .collect();
        Multigraph::new(k.clone(), fibers, if extra { 3 } else { 2 }).unwrap()
    }

    #[test]
    fn covering_number_uses_separated_point() {
        let k = SampledCompact::segment(-1.0, 1.0, 21).unwrap();
        let seq: Vec<(u32, Multigraph)> = (1..=6)
            .map(|d| (d, two_branch(&k, 0.5f64.powi(d as i32), false)))
            .collect();
        // the branches t and -t cross at the midpoint x = 0 (index 10)
        assert!(detect_covering_number(&seq, 2, Some(10)).is_err());
        let r = detect_covering_number(&seq, 2, Some(0)).unwrap();
        assert_eq!(r.n, 2);
        assert_eq!(detect_covering_number(&seq, 2, None).unwrap().n, 2);
    }

    #[test]
    fn spurious_branch_is_rejected() {
        let k = SampledCompact::segment(-1.0, 1.0, 11).unwrap();
        let seq: Vec<(u32, Multigraph)> = (1..=6)
            .map(|d| (d, two_branch(&k, 0.5f64.powi(d as i32), true)))
            .collect();
        assert!(matches!(
            detect_covering_number(&seq, 2, None),
            Err(ConverseError::CoveringNumber { .. })
        ));
    }

    #[test]
    fn slow_distances_fail_the_precondition() {
        let k = SampledCompact::segment(-1.0, 1.0, 11).unwrap();
        let y = two_branch(&k, 0.0, false);
        let seq: Vec<(u32, Multigraph)> = (1..=10).map(|d| (d, y.clone())).collect();
        let delta: Vec<f64> = (1..=10).map(|d| 1.0 / (d * d) as f64).collect();
        assert!(matches!(
            converse_experiment(&y, &seq, 2, &delta, Some(0)),
            Err(ConverseError::Precondition(_))
        ));
    }

    #[test]
    fn exact_sequence_is_trivially_geometric() {
        let k = SampledCompact::segment(-1.0, 1.0, 11).unwrap();
        let y = two_branch(&k, 0.3, false);
        let seq: Vec<(u32, Multigraph)> = (1..=8).map(|d| (d, y.clone())).collect();
        let r = converse_experiment(&y, &seq, 2, &[0.0; 8], Some(0)).unwrap();
        assert_eq!(r.verdict, ConverseVerdict::HolomorphicWitness);
        assert!(r.records.iter().all(|rec| rec.coeff_sup_errors.iter().all(|&e| e == 0.0)));
    }
}
