//! Discrete best uniform approximation by polynomials on sampled compacts.
//!
//! Multivariate and complex data use Lawson's iteratively reweighted least
//! squares. Real data on a real interval use a discrete Remez exchange, which
//! converges to the discrete minimax solution to near machine precision.

mod basis;

pub use basis::{design_matrix, dim_polynomials, exponents, BasisExpansion, CoordMap};

use log::debug;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Expr, Polynomial};
use crate::sets::{fit_geometric_rate, RateFit, SampledCompact};
use crate::Complex;

/// Relative gap between the best observed error and the proven lower bound at
/// which Lawson's iteration stops.
pub const LAWSON_GAP: f64 = 1e-3;
pub const LAWSON_MAX_ITERATIONS: usize = 200;
pub const REMEZ_MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChebError {
    #[error("{samples} samples cannot determine the {needed} coefficients of degree {degree}")]
    TooFewSamples {
        samples: usize,
        needed: usize,
        degree: u32,
    },
    #[error("Vandermonde matrix has rank {rank}, degree {degree} needs {needed}")]
    RankDeficient {
        rank: usize,
        needed: usize,
        degree: u32,
    },
    #[error("{found} function values for {expected} sample points")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite function value at sample {0}")]
    NonFinite(usize),
    #[error("degree range must contain at least 6 distinct degrees, got {0}")]
    RangeTooShort(usize),
    #[error("least-squares solve failed at degree {0}")]
    SolveFailed(u32),
    #[error("function failed to evaluate at sample {index}: {message}")]
    Eval { index: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Minimax,
    LeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Minimax,
    LeastSquaresUpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxResult {
    pub degree: u32,
    pub poly: Polynomial,
    pub expansion: BasisExpansion,
    /// `max_i |f(x_i) - P(x_i)|`, recomputed from the expansion after the solve.
    pub error: f64,
    /// A proven lower bound on the discrete minimax error, when the method yields one.
    pub lower_bound: Option<f64>,
    pub method: Method,
    pub iterations: usize,
    /// Set when the approximant of a lower degree was kept because it was better.
    pub carried_from: Option<u32>,
}

impl ApproxResult {
    pub fn eval(&self, x: &[Complex]) -> Complex {
        self.expansion.eval(x)
    }
}

/// Values of `f` at every sample point of `k`.
pub fn sample_function(k: &SampledCompact, f: &Expr) -> Result<Vec<Complex>, ChebError> {
    k.points()
        .iter()
        .enumerate()
        .map(|(index, x)| {
            f.eval(x).map_err(|e| ChebError::Eval {
                index,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Best approximation of sampled data by polynomials of total degree `<= d`.
pub fn best_approx(
    k: &SampledCompact,
    values: &[Complex],
    d: u32,
    mode: Mode,
) -> Result<ApproxResult, ChebError> {
    if values.len() != k.len() {
        return Err(ChebError::LengthMismatch {
            expected: k.len(),
            found: values.len(),
        });
    }
    if let Some(i) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(ChebError::NonFinite(i));
    }
    let m = k.m();
    let points = k.points();
    let maps: Vec<CoordMap> = (0..m)
        .map(|v| CoordMap::fit(points.iter().map(move |p| p[v])))
        .collect();
    let exps = exponents(m, d);
    let needed = exps.len();
    if points.len() < needed {
        return Err(ChebError::TooFewSamples {
            samples: points.len(),
            needed,
            degree: d,
        });
    }
    let a = design_matrix(&maps, points, &exps, d);
    let rank = numerical_rank(&a);
    if rank < needed {
        return Err(ChebError::RankDeficient {
            rank,
            needed,
            degree: d,
        });
    }
    let b = DVector::from_column_slice(values);
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let ls = weighted_ls(&a, &b, None).ok_or(ChebError::SolveFailed(d))?;
    let make = |coeffs: Vec<Complex>| BasisExpansion {
        maps: maps.clone(),
        degree: d,
        exponents: exps.clone(),
        coeffs,
    };
    let error_of = |e: &BasisExpansion| {
        points
            .iter()
            .zip(values)
            .map(|(x, f)| (f - e.eval(x)).norm())
            .fold(0.0, f64::max)
    };
    let ls_exp = make(ls.iter().copied().collect());
    let ls_err = error_of(&ls_exp);

    let (expansion, error, lower_bound, method, iterations) = match mode {
        Mode::LeastSquares => (ls_exp, ls_err, None, Method::LeastSquaresUpperBound, 1),
        Mode::Minimax => {
            let real_data = m == 1
                && matches!(maps[0], CoordMap::Chebyshev { .. })
                && values.iter().all(|z| z.im.abs() <= 1e-15 * scale.max(f64::MIN_POSITIVE));
            let remez_out = if real_data {
                remez(&a, values, d)
            } else {
                None
            };
            let (coeffs, lower, iters) = match remez_out {
                Some(r) => r,
                None => lawson(&a, &b, scale).ok_or(ChebError::SolveFailed(d))?,
            };
            let cand = make(coeffs);
            let err = error_of(&cand);
            // the least-squares fit is a valid competitor; keep whichever is better
            if err <= ls_err {
                (cand, err, Some(lower), Method::Minimax, iters)
            } else {
                (ls_exp, ls_err, Some(lower), Method::Minimax, iters)
            }
        }
    };
    Ok(ApproxResult {
        degree: d,
        poly: expansion.to_polynomial(),
        expansion,
        error,
        lower_bound,
        method,
        iterations,
        carried_from: None,
    })
}

/// [`best_approx`] at every degree in `ds` (nondecreasing), in parallel.
///
/// Since `P_d ⊂ P_{d'}` for `d <= d'`, an approximant that is worse than the one
/// found for a smaller degree is replaced by it, which keeps the error sequence
/// non-increasing.
pub fn approx_sequence(
    k: &SampledCompact,
    values: &[Complex],
    ds: &[u32],
    mode: Mode,
) -> Result<Vec<ApproxResult>, ChebError> {
    let mut out: Vec<ApproxResult> = ds
        .par_iter()
        .map(|&d| best_approx(k, values, d, mode))
        .collect::<Result<_, _>>()?;
    for i in 1..out.len() {
        if ds[i] >= ds[i - 1] && out[i].error > out[i - 1].error {
            let prev = &out[i - 1];
            let from = prev.carried_from.unwrap_or(prev.degree);
            out[i] = ApproxResult {
                degree: ds[i],
                carried_from: Some(from),
                ..prev.clone()
            };
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarRate {
    pub errors: Vec<(u32, f64)>,
    pub fit: RateFit,
}

/// Minimax errors over `ds` and their geometric-rate fit.
pub fn scalar_bws_rate(
    k: &SampledCompact,
    values: &[Complex],
    ds: &[u32],
) -> Result<ScalarRate, ChebError> {
    let mut distinct = ds.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 6 {
        return Err(ChebError::RangeTooShort(distinct.len()));
    }
    let results = approx_sequence(k, values, &distinct, Mode::Minimax)?;
    let errors: Vec<(u32, f64)> = results.iter().map(|r| (r.degree, r.error)).collect();
    let fit = fit_geometric_rate(&errors);
    Ok(ScalarRate { errors, fit })
}

fn numerical_rank(a: &DMatrix<Complex>) -> usize {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let tol = max * a.nrows().max(a.ncols()) as f64 * f64::EPSILON * 10.0;
    sv.iter().filter(|&&s| s > tol).count()
}

/// Minimizes `sum_i w_i |b_i - (A c)_i|^2` by Householder QR.
fn weighted_ls(a: &DMatrix<Complex>, b: &DVector<Complex>, w: Option<&[f64]>) -> Option<DVector<Complex>> {
    let (aw, bw) = match w {
        None => (a.clone(), b.clone()),
        Some(w) => {
            let mut aw = a.clone();
            let mut bw = b.clone();
            for (i, wi) in w.iter().enumerate() {
                let s = wi.sqrt();
                aw.row_mut(i).scale_mut(s);
                bw[i] *= s;
            }
            (aw, bw)
        }
    };
    let n = aw.ncols();
    let qr = aw.qr();
    let rhs = qr.q().adjoint() * bw;
    let r = qr.r();
    let x = r.solve_upper_triangular(&rhs.rows(0, n).into_owned())?;
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(x)
}

/// Lawson's algorithm. Returns the best iterate, the largest certified lower
/// bound `sqrt(sum w_i |r_i|^2)` and the iteration count.
fn lawson(a: &DMatrix<Complex>, b: &DVector<Complex>, scale: f64) -> Option<(Vec<Complex>, f64, usize)> {
    let ns = a.nrows();
    let mut w = vec![1.0 / ns as f64; ns];
    let mut best: Option<(f64, DVector<Complex>)> = None;
    let mut lower = 0.0f64;
    let mut iters = 0;
    for it in 1..=LAWSON_MAX_ITERATIONS {
        iters = it;
        let c = weighted_ls(a, b, Some(&w))?;
        let r = b - a * &c;
        let abs: Vec<f64> = r.iter().map(|z| z.norm()).collect();
        let u = abs.iter().copied().fold(0.0, f64::max);
        let l = w.iter().zip(&abs).map(|(wi, ri)| wi * ri * ri).sum::<f64>().sqrt();
        lower = lower.max(l);
        if best.as_ref().is_none_or(|(bu, _)| u < *bu) {
            best = Some((u, c));
        }
        let bu = best.as_ref().map(|(u, _)| *u).unwrap_or(f64::INFINITY);
        if bu - lower <= LAWSON_GAP * bu || bu <= 1e-14 * scale {
            break;
        }
        let mut total = 0.0;
        for (wi, ri) in w.iter_mut().zip(&abs) {
            *wi *= ri;
            total += *wi;
        }
        if total <= 0.0 {
            break;
        }
        let wmax = w.iter().copied().fold(0.0, f64::max) / total;
        for wi in &mut w {
            *wi = (*wi / total).max(1e-14 * wmax);
        }
    }
    if iters == LAWSON_MAX_ITERATIONS {
        debug!("lawson stopped after {iters} iterations with lower bound {lower:.3e}");
    }
    best.map(|(_, c)| (c.iter().copied().collect(), lower, iters))
}

/// Discrete Remez exchange for real data on sorted-or-not real nodes.
///
/// Works on the real part of the (real) design matrix. Returns `None` when the
/// residual does not alternate enough to form a reference, in which case the
/// caller falls back to Lawson.
fn remez(a: &DMatrix<Complex>, values: &[Complex], d: u32) -> Option<(Vec<Complex>, f64, usize)> {
    let n = d as usize + 2;
    let ns = a.nrows();
    // nodes in increasing order of the Chebyshev variable T_1 = column 1
    let mut order: Vec<usize> = (0..ns).collect();
    if d >= 1 {
        order.sort_by(|&i, &j| a[(i, 1)].re.total_cmp(&a[(j, 1)].re));
    } else {
        // degree 0 has no position column; any order still gives a valid reference
    }
    if ns < n {
        return None;
    }
    let bm = DMatrix::<f64>::from_fn(ns, d as usize + 1, |i, k| a[(order[i], k)].re);
    let f: Vec<f64> = order.iter().map(|&i| values[i].re).collect();
    let scale = f.iter().map(|x| x.abs()).fold(0.0, f64::max);

    // first n of n + 1 Chebyshev extrema: a symmetric start would give a zero
    // level for even data
    let mut reference: Vec<usize> = (0..n)
        .map(|j| {
            let p = (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos()) / 2.0;
            (p * (ns - 1) as f64).round() as usize
        })
        .collect();
    for j in 1..n {
        reference[j] = reference[j].max(reference[j - 1] + 1);
    }
    reference[n - 1] = reference[n - 1].min(ns - 1);
    for j in (0..n - 1).rev() {
        reference[j] = reference[j].min(reference[j + 1] - 1);
    }

    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut lower = 0.0f64;
    let mut iters = 0;
    for it in 1..=REMEZ_MAX_ITERATIONS {
        iters = it;
        let mut sys = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for (j, &i) in reference.iter().enumerate() {
            for k in 0..n - 1 {
                sys[(j, k)] = bm[(i, k)];
            }
            sys[(j, n - 1)] = if j % 2 == 0 { 1.0 } else { -1.0 };
            rhs[j] = f[i];
        }
        let sol = sys.lu().solve(&rhs)?;
        let h = sol[n - 1].abs();
        let c = sol.rows(0, n - 1).into_owned();
        let approx = &bm * &c;
        let r: Vec<f64> = f.iter().zip(approx.iter()).map(|(fi, pi)| fi - pi).collect();
        let (imax, u) = r
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
        lower = lower.max(h);
        if best.as_ref().is_none_or(|(bu, _)| u < *bu) {
            best = Some((u, c));
        }
        let bu = best.as_ref().map(|(u, _)| *u).unwrap_or(f64::INFINITY);
        if bu - lower <= 1e-12 * bu || bu <= 1e-14 * scale {
            break;
        }
        // one extremum of |r| per run of constant sign, ignoring points below the
        // current level so that the levelled error cannot decrease
        let level = h * (1.0 - 1e-6) - 64.0 * f64::EPSILON * scale;
        let mut ext: Vec<usize> = Vec::new();
        for i in (0..ns).filter(|&i| r[i].abs() >= level) {
            let positive = r[i] >= 0.0;
            match ext.last() {
                Some(&last) if (r[last] >= 0.0) == positive => {
                    if r[i].abs() > r[last].abs() {
                        *ext.last_mut().unwrap() = i;
                    }
                }
                _ => ext.push(i),
            }
        }
        if ext.len() < n {
            break;
        }
        let mut lo = 0;
        let mut hi = ext.len();
        while hi - lo > n {
            let (first, last) = (ext[lo], ext[hi - 1]);
            if first != imax && (last == imax || r[first].abs() <= r[last].abs()) {
                lo += 1;
            } else {
                hi -= 1;
            }
        }
        let next = ext[lo..hi].to_vec();
        if next == reference {
            break;
        }
        reference = next;
    }
    let (_, c) = best?;
    Some((c.iter().map(|&x| Complex::new(x, 0.0)).collect(), lower, iters))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(count: usize) -> SampledCompact {
        SampledCompact::segment(-1.0, 1.0, count).unwrap()
    }

    fn values(k: &SampledCompact, f: impl Fn(Complex) -> Complex) -> Vec<Complex> {
        k.points().iter().map(|p| f(p[0])).collect()
    }

    #[test]
    fn reproduces_polynomials() {
        let k = seg(101);
        let p = Polynomial::univariate(&[
            Complex::new(1.0, 0.0),
            Complex::new(-2.0, 0.5),
            Complex::new(0.0, 0.0),
            Complex::new(3.0, 0.0),
        ]);
        let v: Vec<Complex> = k.points().iter().map(|x| p.eval(x).unwrap()).collect();
        for mode in [Mode::Minimax, Mode::LeastSquares] {
            let r = best_approx(&k, &v, 5, mode).unwrap();
            assert!(r.error <= 1e-10, "{mode:?} {}", r.error);
            for x in k.points() {
                assert!((r.poly.eval(x).unwrap() - p.eval(x).unwrap()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn exp_constant_is_midrange() {
        let k = seg(401);
        let v = values(&k, |x| x.exp());
        let r = best_approx(&k, &v, 0, Mode::Minimax).unwrap();
        let expected = (1f64.exp() - (-1f64).exp()) / 2.0;
        assert!((r.error - expected).abs() < 1e-3);
        let ls = best_approx(&k, &v, 0, Mode::LeastSquares).unwrap();
        assert!(ls.error >= r.error);
    }

    #[test]
    fn remez_matches_lawson_on_real_data() {
        let k = seg(201);
        let v = values(&k, |x| (3.0 * x).sin() + x.exp());
        let r = best_approx(&k, &v, 6, Mode::Minimax).unwrap();
        let a = design_matrix(
            &[CoordMap::Chebyshev { lo: -1.0, hi: 1.0 }],
            k.points(),
            &exponents(1, 6),
            6,
        );
        let b = DVector::from_column_slice(&v);
        let (_, lower, _) = lawson(&a, &b, 1.0).unwrap();
        assert!(r.error >= lower * (1.0 - 1e-12));
        assert!(r.lower_bound.unwrap() <= r.error);
        assert!(r.error - r.lower_bound.unwrap() <= 1e-10 * r.error);
    }

    #[test]
    fn complex_disc_uses_lawson() {
        let k = SampledCompact::disc(Complex::new(0.0, 0.0), 1.0, 0.2).unwrap();
        let v = values(&k, |z| z.exp());
        let r = best_approx(&k, &v, 4, Mode::Minimax).unwrap();
        let ls = best_approx(&k, &v, 4, Mode::LeastSquares).unwrap();
        assert!(r.error <= ls.error);
        assert!(r.lower_bound.unwrap() <= r.error);
        // |e^z - partial sum| <= e/5! is an upper bound for the minimax error
        assert!(r.error < 1f64.exp() / 120.0);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let k = SampledCompact::from_complex(&[Complex::new(0.0, 0.0), Complex::new(1.0, 0.0), Complex::new(2.0, 0.0)], 0.5)
            .unwrap();
        let v = vec![Complex::new(1.0, 0.0); 3];
        assert!(matches!(
            best_approx(&k, &v, 3, Mode::Minimax),
            Err(ChebError::TooFewSamples { needed: 4, .. })
        ));
        let dup = SampledCompact::from_complex(&[Complex::new(0.0, 0.0); 4], 0.5).unwrap();
        match best_approx(&dup, &[Complex::new(1.0, 0.0); 4], 2, Mode::Minimax) {
            Err(ChebError::RankDeficient { rank, needed, .. }) => assert_eq!((rank, needed), (1, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sequence_is_monotone() {
        let k = seg(201);
        let v = values(&k, |x| x.norm().into());
        let ds: Vec<u32> = (0..20).collect();
        let rs = approx_sequence(&k, &v, &ds, Mode::Minimax).unwrap();
        for w in rs.windows(2) {
            assert!(w[1].error <= w[0].error + 1e-12);
        }
    }
}
