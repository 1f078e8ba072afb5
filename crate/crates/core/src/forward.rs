//! Algebraic approximation of the zero set of a monic pseudopolynomial over a
//! polynomially convex compact, and the rate at which it converges.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{assembled_degree_bound, AlgebraError, Polynomial, Pseudopolynomial};
use crate::chebyshev::{approx_sequence, sample_function, ApproxResult, BasisExpansion, ChebError, Mode};
use crate::roots::{match_roots, solve_monic_relaxing, RootError, DEFAULT_TOL};
use crate::sets::{
    delta_k, fit_geometric_rate, fit_geometric_rate_with_floor, Multigraph, RateFit, SampledCompact,
    SetError, Verdict,
};
use crate::Complex;

/// Fiber distances at or below this are root-solver noise.
pub const DELTA_FLOOR: f64 = 1e-10;
/// Allowance in the rate chain `theta_delta <= theta_coeff^{1/n} + RATE_CHAIN_SLACK`.
pub const RATE_CHAIN_SLACK: f64 = 0.1;
/// Allowance in `theta_graph <= theta_delta + GRAPH_RATE_SLACK`.
pub const GRAPH_RATE_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForwardError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Approx(#[from] ChebError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("precondition: {0}")]
    Precondition(String),
}

/// Coefficients `a_1, ..., a_n` of a pseudopolynomial sampled on `K`, by coefficient.
pub fn sample_coefficients(
    f: &Pseudopolynomial,
    k: &SampledCompact,
) -> Result<Vec<Vec<Complex>>, ForwardError> {
    f.coeffs()
        .iter()
        .map(|a| sample_function(k, a).map_err(ForwardError::from))
        .collect()
}

/// Solves `t^n + c_1 t^{n-1} + ... + c_n` at every sample point.
///
/// `coeffs[j][i]` is `c_{j+1}` at sample `i`. Points where the solver does not
/// converge keep its last iterates as fiber and are flagged.
pub fn multigraph_from_coefficients(
    k: &SampledCompact,
    coeffs: &[Vec<Complex>],
    tol: f64,
) -> Result<Multigraph, ForwardError> {
    let n = coeffs.len();
    if n == 0 {
        return Err(AlgebraError::EmptyPseudopolynomial.into());
    }
    let solved: Vec<(Vec<Complex>, bool)> = (0..k.len())
        .into_par_iter()
        .map(|i| {
            let c: Vec<Complex> = coeffs.iter().map(|a| a[i]).collect();
            match solve_monic_relaxing(&c, tol) {
                Ok(r) => Ok((r.roots, false)),
                Err(RootError::NonConvergence { roots, .. }) => {
                    let finite = roots.iter().all(|z| z.re.is_finite() && z.im.is_finite());
                    let fiber = if finite { roots } else { vec![Complex::new(0.0, 0.0)] };
                    Ok((fiber, true))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()?;
    let flagged: Vec<usize> = solved
        .iter()
        .enumerate()
        .filter(|(_, (_, f))| *f)
        .map(|(i, _)| i)
        .collect();
    if !flagged.is_empty() {
        warn!(
            "root solver did not converge at {} of {} sample points; they are excluded",
            flagged.len(),
            k.len()
        );
    }
    let fibers = solved.into_iter().map(|(r, _)| r).collect();
    Ok(Multigraph::with_flags(k.clone(), fibers, n, flagged)?)
}

/// `X_K = X ∩ (K × ℂ)` for `X = {F = 0}`.
pub fn sample_multigraph(f: &Pseudopolynomial, k: &SampledCompact) -> Result<Multigraph, ForwardError> {
    multigraph_from_coefficients(k, &sample_coefficients(f, k)?, DEFAULT_TOL)
}

/// `P_d = t^n + a_{1,d} t^{n-1} + ... + a_{n,d}` with each `a_{j,d}` a best
/// approximation of `a_j` on `K` by polynomials of degree `<= d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approximant {
    pub d: u32,
    pub coeffs: Vec<ApproxResult>,
}

impl Approximant {
    pub fn polynomials(&self) -> Vec<Polynomial> {
        self.coeffs.iter().map(|r| r.poly.clone()).collect()
    }

    pub fn coeff_errors(&self) -> Vec<f64> {
        self.coeffs.iter().map(|r| r.error).collect()
    }

    /// Values of `a_{j,d}` on the samples of `k`, by coefficient.
    pub fn sample(&self, k: &SampledCompact) -> Vec<Vec<Complex>> {
        self.coeffs
            .iter()
            .map(|r| k.points().iter().map(|x| r.eval(x)).collect())
            .collect()
    }

    /// The assembled `P_d` as a polynomial in `(x, t)`, `t` last.
    pub fn assembled(&self) -> Result<Polynomial, AlgebraError> {
        let n = self.coeffs.len();
        let m = self.coeffs.first().map_or(0, |r| r.poly.num_vars());
        let lift = |p: &Polynomial, tpow: u32| {
            Polynomial::new(
                m + 1,
                p.terms().iter().map(|(e, c)| {
                    let mut e = e.clone();
                    e.push(tpow);
                    (e, *c)
                }),
            )
        };
        let mut exp = vec![0u32; m + 1];
        exp[m] = n as u32;
        let mut total = Polynomial::monomial(m + 1, exp, Complex::new(1.0, 0.0));
        for (j, r) in self.coeffs.iter().enumerate() {
            total = total.add(&lift(&r.poly, (n - 1 - j) as u32)?)?;
        }
        Ok(total)
    }
}

fn check_compact(k: &SampledCompact) -> Result<(), ForwardError> {
    if k.shape().is_none() {
        return Err(ForwardError::Precondition(
            "K must carry a standard polynomially convex shape tag".into(),
        ));
    }
    Ok(())
}

/// Best approximations of every coefficient at degree `d`.
pub fn approximate_hypersurface(
    f: &Pseudopolynomial,
    k: &SampledCompact,
    d: u32,
) -> Result<Approximant, ForwardError> {
    check_compact(k)?;
    let samples = sample_coefficients(f, k)?;
    let coeffs = samples
        .iter()
        .map(|v| crate::chebyshev::best_approx(k, v, d, Mode::Minimax).map_err(ForwardError::from))
        .collect::<Result<_, _>>()?;
    Ok(Approximant { d, coeffs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardRecord {
    pub d: u32,
    /// Coefficient polynomials `a_{1,d}, ..., a_{n,d}` in monomial form.
    pub p_d: Vec<Polynomial>,
    /// The same polynomials in the rescaled basis used for evaluation.
    pub expansions: Vec<BasisExpansion>,
    pub deg_bound: u32,
    pub delta: f64,
    pub graph_dh: f64,
    pub coeff_errors: Vec<f64>,
    /// Largest `bottleneck / (4nC|a - b|^{1/n} + slack)` over sample points.
    pub hoelder_worst_ratio: f64,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardInvariants {
    pub deg_bound: bool,
    pub graph_below_delta: bool,
    pub hoelder: bool,
    /// `None` when a fit needed for the comparison has no verdict.
    pub rate_chain: Option<bool>,
    pub graph_rate: Option<bool>,
}

impl ForwardInvariants {
    pub fn all_pass(&self) -> bool {
        self.deg_bound
            && self.graph_below_delta
            && self.hoelder
            && self.rate_chain != Some(false)
            && self.graph_rate != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardExperiment {
    pub f: Pseudopolynomial,
    pub k: SampledCompact,
    pub n: usize,
    pub d_range: Vec<u32>,
    pub records: Vec<ForwardRecord>,
    pub fit_delta: RateFit,
    pub fit_graph_dh: RateFit,
    pub fit_coeffs: Vec<RateFit>,
    /// Slowest coefficient rate, `max_j theta_j`.
    pub theta_coeff: f64,
    /// Constant `C` of the Hölder check.
    pub hoelder_c: f64,
    /// Root-solver tolerance.
    pub tol: f64,
    pub invariants: ForwardInvariants,
    /// `X_K`, the sampled zero set of `F`.
    pub x_k: Multigraph,
    /// `V_K^{(d)}` for every degree, in `d_range` order.
    pub v_k: Vec<Multigraph>,
}

/// Runs the approximation at every degree of `ds` and fits the decay of the
/// coefficient errors, of `δ_K(X_K, V_K^{(d)})` and of the graph distance.
pub fn forward_rate_experiment(
    f: &Pseudopolynomial,
    k: &SampledCompact,
    ds: &[u32],
) -> Result<ForwardExperiment, ForwardError> {
    forward_rate_experiment_with_tol(f, k, ds, DEFAULT_TOL)
}

/// [`forward_rate_experiment`] with an explicit root-solver tolerance.
pub fn forward_rate_experiment_with_tol(
    f: &Pseudopolynomial,
    k: &SampledCompact,
    ds: &[u32],
    tol: f64,
) -> Result<ForwardExperiment, ForwardError> {
    check_compact(k)?;
    if !(tol > 0.0) {
        return Err(ForwardError::Precondition(format!("root tolerance must be positive, got {tol}")));
    }
    let mut ds = ds.to_vec();
    ds.sort_unstable();
    ds.dedup();
    let n = f.degree();
    if ds.len() < 6 {
        return Err(ForwardError::Precondition(format!(
            "degree range needs at least 6 degrees, got {}",
            ds.len()
        )));
    }
    if (*ds.last().unwrap() as usize) < n {
        return Err(ForwardError::Precondition(format!(
            "largest degree must be at least the fiber degree {n}"
        )));
    }
    let samples = sample_coefficients(f, k)?;
    let x_k = multigraph_from_coefficients(k, &samples, tol)?;
    // per coefficient, per degree
    let approx: Vec<Vec<ApproxResult>> = samples
        .iter()
        .map(|v| approx_sequence(k, v, &ds, Mode::Minimax))
        .collect::<Result<_, _>>()?;

    let sup_a = samples
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let max_err = approx.iter().flatten().map(|r| r.error).fold(0.0, f64::max);
    let hoelder_c = sup_a + max_err + 1.0;

    let per_d: Vec<(ForwardRecord, Multigraph, bool)> = ds
        .par_iter()
        .enumerate()
        .map(|(di, &d)| {
            let app = Approximant {
                d,
                coeffs: approx.iter().map(|a| a[di].clone()).collect(),
            };
            let vals = app.sample(k);
            let v = multigraph_from_coefficients(k, &vals, tol)?;
            let (delta, graph_dh, below) = match delta_k(&x_k, &v) {
                Ok(r) => (r.delta, r.graph_dh, true),
                Err(SetError::InequalityViolated { graph_dh, delta }) => (delta, graph_dh, false),
                Err(e) => return Err(e.into()),
            };
            let hoelder_worst_ratio = hoelder_worst(&x_k, &v, &samples, &vals, hoelder_c, tol)?;
            let flagged = x_k
                .flagged()
                .iter()
                .chain(v.flagged())
                .collect::<std::collections::BTreeSet<_>>()
                .len();
            let record = ForwardRecord {
                d,
                p_d: app.polynomials(),
                expansions: app.coeffs.iter().map(|r| r.expansion.clone()).collect(),
                deg_bound: assembled_degree_bound(d, n as u32),
                delta,
                graph_dh,
                coeff_errors: app.coeff_errors(),
                hoelder_worst_ratio,
                flagged,
            };
            Ok((record, v, below))
        })
        .collect::<Result<_, ForwardError>>()?;

    let graph_below_delta = per_d.iter().all(|(_, _, b)| *b);
    let (records, v_k): (Vec<ForwardRecord>, Vec<Multigraph>) =
        per_d.into_iter().map(|(r, v, _)| (r, v)).unzip();

    let fit_delta = fit_geometric_rate_with_floor(
        &records.iter().map(|r| (r.d, r.delta)).collect::<Vec<_>>(),
        DELTA_FLOOR,
    );
    let fit_graph_dh = fit_geometric_rate_with_floor(
        &records.iter().map(|r| (r.d, r.graph_dh)).collect::<Vec<_>>(),
        DELTA_FLOOR,
    );
    let fit_coeffs: Vec<RateFit> = (0..n)
        .map(|j| {
            fit_geometric_rate(&records.iter().map(|r| (r.d, r.coeff_errors[j])).collect::<Vec<_>>())
        })
        .collect();
    let theta_coeff = fit_coeffs.iter().map(|f| f.theta).fold(0.0, f64::max);
    let has_theta = |f: &RateFit| f.verdict != Verdict::Inconclusive;

    let invariants = ForwardInvariants {
        deg_bound: records
            .iter()
            .filter(|r| r.d as usize >= n)
            .all(|r| r.deg_bound <= 2 * r.d - 1),
        graph_below_delta,
        hoelder: records.iter().all(|r| r.hoelder_worst_ratio <= 1.0),
        rate_chain: (has_theta(&fit_delta) && fit_coeffs.iter().all(has_theta)).then(|| {
            fit_delta.theta <= theta_coeff.powf(1.0 / n as f64) + RATE_CHAIN_SLACK
        }),
        graph_rate: (has_theta(&fit_delta) && has_theta(&fit_graph_dh))
            .then(|| fit_graph_dh.theta <= fit_delta.theta + GRAPH_RATE_SLACK),
    };

    Ok(ForwardExperiment {
        f: f.clone(),
        k: k.clone(),
        n,
        d_range: ds,
        records,
        fit_delta,
        fit_graph_dh,
        fit_coeffs,
        theta_coeff,
        hoelder_c,
        tol,
        invariants,
        x_k,
        v_k,
    })
}

/// Worst ratio of the matched root distance to the Hölder bound over unflagged points.
fn hoelder_worst(
    x: &Multigraph,
    v: &Multigraph,
    a: &[Vec<Complex>],
    b: &[Vec<Complex>],
    c: f64,
    tol: f64,
) -> Result<f64, ForwardError> {
    let n = a.len();
    let slack = 10.0 * tol;
    let mut worst = 0.0f64;
    for i in 0..x.fibers().len() {
        if x.is_flagged(i) || v.is_flagged(i) {
            continue;
        }
        let diff = (0..n).map(|j| (a[j][i] - b[j][i]).norm()).fold(0.0, f64::max);
        let rhs = 4.0 * n as f64 * c * diff.powf(1.0 / n as f64) + slack;
        let m = match_roots(x.fiber(i), v.fiber(i))?;
        worst = worst.max(m.bottleneck / rhs);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Expr;

    fn t2_minus_exp() -> Pseudopolynomial {
        Pseudopolynomial::new(vec![Expr::constant(0.0), Expr::neg(Expr::exp(Expr::coord(0)))]).unwrap()
    }

    #[test]
    fn constant_fibers() {
        let k = SampledCompact::segment(-1.0, 1.0, 5).unwrap();
        let f = Pseudopolynomial::new(vec![Expr::constant(0.0), Expr::constant(-1.0)]).unwrap();
        let g = sample_multigraph(&f, &k).unwrap();
        for fib in g.fibers() {
            let mut re: Vec<f64> = fib.iter().map(|z| z.re).collect();
            re.sort_by(f64::total_cmp);
            assert!((re[0] + 1.0).abs() < 1e-12 && (re[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn square_roots_on_circle() {
        let k = SampledCompact::circle(Complex::new(0.0, 0.0), 1.0, 16).unwrap();
        let f = Pseudopolynomial::new(vec![
            Expr::constant(0.0),
            Expr::neg(Expr::coord(0)),
        ])
        .unwrap();
        let g = sample_multigraph(&f, &k).unwrap();
        for (x, fib) in k.points().iter().zip(g.fibers()) {
            for t in fib {
                assert!((t * t - x[0]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn degree_one_delta_equals_coefficient_error() {
        let k = SampledCompact::segment(-1.0, 1.0, 201)
            .unwrap();
        let f = Pseudopolynomial::new(vec![Expr::neg(Expr::exp(Expr::coord(0)))]).unwrap();
        let e = forward_rate_experiment(&f, &k, &[1, 2, 3, 4, 5, 6]).unwrap();
        for r in &e.records {
            assert!((r.delta - r.coeff_errors[0]).abs() <= 1e-12 * (1.0 + r.delta), "{r:?}");
        }
    }

    #[test]
    fn coefficient_error_matches_scalar_approximation() {
        let k = SampledCompact::segment(-1.0, 1.0, 401).unwrap();
        let app = approximate_hypersurface(&t2_minus_exp(), &k, 8).unwrap();
        let exp: Vec<Complex> = k.points().iter().map(|x| x[0].exp()).collect();
        let scalar = crate::chebyshev::best_approx(&k, &exp, 8, Mode::Minimax).unwrap();
        assert!((app.coeff_errors()[1] - scalar.error).abs() < 1e-15);
        let assembled = app.assembled().unwrap();
        assert_eq!(assembled.degree(), 8.max(2));
    }

    #[test]
    fn requires_shape_tag() {
        let k = SampledCompact::circle(Complex::new(0.0, 0.0), 1.0, 16).unwrap();
        assert!(matches!(
            approximate_hypersurface(&t2_minus_exp(), &k, 3),
            Err(ForwardError::Precondition(_))
        ));
    }
}
