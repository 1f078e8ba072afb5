//! Simultaneous root finding for monic polynomials, bottleneck root matching
//! and the Hölder perturbation bound `|ζ^a_j - ζ^b_σ(j)| <= 4nC|a-b|^{1/n}`.

use serde::{Deserialize, Serialize};

use crate::Complex;

/// Default residual tolerance of [`solve_monic`].
pub const DEFAULT_TOL: f64 = 1e-12;
/// Tolerance used once iterates cluster (multiple or nearly multiple roots).
pub const RELAXED_TOL: f64 = 1e-6;
/// Minimum pairwise iterate distance below which roots count as clustered.
pub const CLUSTER_DISTANCE: f64 = 1e-4;
pub const MAX_ITERATIONS: usize = 500;
/// Sweeps allowed before the relaxed tolerance may be used.
const RELAX_AFTER: usize = 100;
/// Rotation of the initial circle, kept away from rational multiples of pi.
const START_ANGLE: f64 = 0.4142135623730951;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("empty coefficient vector")]
    Empty,
    #[error("non-finite coefficient at index {0}")]
    NonFinite(usize),
    #[error("no convergence after {iterations} sweeps (residual {residual:e})")]
    NonConvergence {
        residual: f64,
        iterations: usize,
        roots: Vec<Complex>,
    },
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// All roots of a monic polynomial, with the achieved residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Complex>,
    /// `max |P(ζ)|` over the returned roots.
    pub residual: f64,
    /// Tolerance actually met (the requested one, or [`RELAXED_TOL`]).
    pub tol: f64,
    /// Residual bound that was certified: `tol * max(1, max|a_j|)`, or the
    /// rounding-error level of Horner evaluation when that is larger.
    pub bound: f64,
    pub iterations: usize,
}

/// Horner evaluation of `t^n + a_1 t^{n-1} + ... + a_n` plus a running
/// rounding-error bound.
fn horner(coeffs: &[Complex], z: Complex) -> (Complex, f64) {
    let mut p = Complex::new(1.0, 0.0);
    let az = z.norm();
    let mut mag = 1.0;
    for &a in coeffs {
        p = p * z + a;
        mag = mag * az + a.norm();
    }
    let n = coeffs.len() as f64;
    (p, 4.0 * n * f64::EPSILON * mag)
}

fn min_pairwise_distance(z: &[Complex]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            best = best.min((z[i] - z[j]).norm());
        }
    }
    best
}

const POLISH_SWEEPS: usize = 3;

/// One Weierstrass update of every iterate, in place.
fn sweep(coeffs: &[Complex], z: &mut [Complex], scale: f64) {
    let n = z.len();
    for k in 0..n {
        let (p, _) = horner(coeffs, z[k]);
        let mut denom = Complex::new(1.0, 0.0);
        for j in 0..n {
            if j != k {
                denom *= z[k] - z[j];
            }
        }
        if denom.norm() == 0.0 {
            // coincident iterates; nudge apart deterministically
            z[k] += Complex::new(1e-8 * scale, 1e-8 * scale);
            continue;
        }
        z[k] -= p / denom;
    }
}

fn residual_and_floor(coeffs: &[Complex], z: &[Complex]) -> (f64, f64) {
    z.iter().fold((0.0f64, 0.0f64), |(r, f), &zk| {
        let (p, err) = horner(coeffs, zk);
        (r.max(p.norm()), f.max(err))
    })
}

/// Roots of `t^n + a_1 t^{n-1} + ... + a_n` by Weierstrass (Durand-Kerner) iteration.
///
/// Starts from `n` points equally spaced on the circle of radius `1 + max|a_j|`
/// and stops once every `|P(ζ_k)| <= tol * max(1, max|a_j|)`. When iterates
/// cluster closer than [`CLUSTER_DISTANCE`] the tolerance is relaxed to
/// [`RELAXED_TOL`]. Deterministic: no randomness in the starting points.
pub fn solve_monic(coeffs: &[Complex], tol: f64) -> Result<RootSet, RootError> {
    let n = coeffs.len();
    if n == 0 {
        return Err(RootError::Empty);
    }
    if let Some(i) = coeffs
        .iter()
        .position(|a| !(a.re.is_finite() && a.im.is_finite()))
    {
        return Err(RootError::NonFinite(i));
    }
    let max_coeff = coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let scale = max_coeff.max(1.0);

    if n == 1 {
        let root = -coeffs[0];
        let (p, _) = horner(coeffs, root);
        return Ok(RootSet {
            roots: vec![root],
            residual: p.norm(),
            tol,
            bound: tol * scale,
            iterations: 0,
        });
    }

    let radius = 1.0 + max_coeff;
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + START_ANGLE;
            Complex::from_polar(radius, angle)
        })
        .collect();

    let mut residual = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        sweep(coeffs, &mut z, scale);
        let (res, floor) = residual_and_floor(coeffs, &z);
        residual = res;
        if !residual.is_finite() {
            break;
        }
        let strict = (tol * scale).max(floor);
        if residual <= strict {
            // quadratic convergence makes a couple more sweeps nearly free;
            // they take the roots from tolerance level down to rounding level
            for _ in 0..POLISH_SWEEPS {
                let mut next = z.clone();
                sweep(coeffs, &mut next, scale);
                let (r, _) = residual_and_floor(coeffs, &next);
                if !(r < residual) {
                    break;
                }
                z = next;
                residual = r;
            }
            return Ok(RootSet {
                roots: z,
                residual,
                tol,
                bound: strict,
                iterations: it,
            });
        }
        if it >= RELAX_AFTER && tol < RELAXED_TOL && min_pairwise_distance(&z) < CLUSTER_DISTANCE
        {
            let relaxed = (RELAXED_TOL * scale).max(floor);
            if residual <= relaxed {
                return Ok(RootSet {
                    roots: z,
                    residual,
                    tol: RELAXED_TOL,
                    bound: relaxed,
                    iterations: it,
                });
            }
        }
    }
    Err(RootError::NonConvergence {
        residual,
        iterations: MAX_ITERATIONS,
        roots: z,
    })
}

/// [`solve_monic`] retrying once at [`RELAXED_TOL`] on non-convergence.
pub fn solve_monic_relaxing(coeffs: &[Complex], tol: f64) -> Result<RootSet, RootError> {
    match solve_monic(coeffs, tol) {
        Err(RootError::NonConvergence { .. }) if tol < RELAXED_TOL => {
            solve_monic(coeffs, RELAXED_TOL)
        }
        other => other,
    }
}

/// A bijection between two equal-size root multisets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootMatching {
    /// `A[i]` is paired with `B[perm[i]]`.
    pub perm: Vec<usize>,
    /// `max_i |A[i] - B[perm[i]]|`, minimal over all bijections.
    pub bottleneck: f64,
}

/// Kuhn's augmenting-path matching on the graph `|a_i - b_j| <= threshold`.
fn perfect_matching(dist: &[Vec<f64>], threshold: f64) -> Option<Vec<usize>> {
    let n = dist.len();
    let mut match_b: Vec<Option<usize>> = vec![None; n];

    fn augment(
        i: usize,
        dist: &[Vec<f64>],
        threshold: f64,
        seen: &mut [bool],
        match_b: &mut [Option<usize>],
    ) -> bool {
        for j in 0..dist.len() {
            if dist[i][j] <= threshold && !seen[j] {
                seen[j] = true;
                let free = match match_b[j] {
                    None => true,
                    Some(other) => augment(other, dist, threshold, seen, match_b),
                };
                if free {
                    match_b[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }

    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, dist, threshold, &mut seen, &mut match_b) {
            return None;
        }
    }
    let mut perm = vec![0; n];
    for (j, i) in match_b.into_iter().enumerate() {
        perm[i.expect("perfect matching covers every vertex")] = j;
    }
    Some(perm)
}

/// Bottleneck-optimal matching: binary search over the `n^2` candidate
/// distances with a bipartite feasibility test at each step.
pub fn match_roots(a: &[Complex], b: &[Complex]) -> Result<RootMatching, RootError> {
    if a.len() != b.len() {
        return Err(RootError::SizeMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(RootError::Empty);
    }
    let dist: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    let mut candidates: Vec<f64> = dist.iter().flatten().copied().collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    let mut best = perfect_matching(&dist, candidates[hi]).expect("complete graph has a matching");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match perfect_matching(&dist, candidates[mid]) {
            Some(p) => {
                best = p;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    if lo < candidates.len() {
        if let Some(p) = perfect_matching(&dist, candidates[lo]) {
            best = p;
        }
    }
    let bottleneck = best
        .iter()
        .enumerate()
        .map(|(i, &j)| dist[i][j])
        .fold(0.0, f64::max);
    Ok(RootMatching {
        perm: best,
        bottleneck,
    })
}

/// Outcome of one Hölder-bound check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoelderReport {
    pub n: usize,
    /// `|ζ^a_j - ζ^b_σ(j)|` under the bottleneck-optimal σ.
    pub lhs: Vec<f64>,
    pub bottleneck: f64,
    /// `4 n C |a - b|_∞^{1/n}`.
    pub rhs: f64,
    /// Numerical allowance `10 * tol` of the solves.
    pub slack: f64,
    /// `bottleneck / rhs`; `None` when `rhs = 0`.
    pub ratio: Option<f64>,
    pub pass: bool,
}

fn max_norm(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Checks `max_j |ζ^a_j - ζ^b_σ(j)| <= 4nC|a-b|^{1/n}` for the max norm on ℂ^n.
///
/// Requires `C > 1`, `|a|_∞ <= C` and `|b|_∞ <= C`; violations are rejected.
pub fn hoelder_check(
    a: &[Complex],
    b: &[Complex],
    c: f64,
    tol: f64,
) -> Result<HoelderReport, RootError> {
    if a.len() != b.len() {
        return Err(RootError::SizeMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(RootError::Empty);
    }
    if c.is_nan() || c <= 1.0 {
        return Err(RootError::Precondition(format!("C = {c} must exceed 1")));
    }
    let (na, nb) = (max_norm(a), max_norm(b));
    if na > c || nb > c {
        return Err(RootError::Precondition(format!(
            "|a| = {na}, |b| = {nb} must not exceed C = {c}"
        )));
    }
    let n = a.len();
    let ra = solve_monic_relaxing(a, tol)?;
    let rb = solve_monic_relaxing(b, tol)?;
    let m = match_roots(&ra.roots, &rb.roots)?;
    let lhs: Vec<f64> = m
        .perm
        .iter()
        .enumerate()
        .map(|(i, &j)| (ra.roots[i] - rb.roots[j]).norm())
        .collect();
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let rhs = 4.0 * n as f64 * c * diff.powf(1.0 / n as f64);
    let slack = 10.0 * ra.tol.max(rb.tol);
    Ok(HoelderReport {
        n,
        lhs,
        bottleneck: m.bottleneck,
        rhs,
        slack,
        ratio: (rhs > 0.0).then(|| m.bottleneck / rhs),
        pass: m.bottleneck <= rhs + slack,
    })
}
