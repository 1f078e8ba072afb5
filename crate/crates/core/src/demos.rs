//! Worked counterexamples: a staircase whose graphs converge geometrically while
//! the sup norm does not, the non-closedness of bounded-degree multigraphs, and
//! the per-degree constant relating fiberwise and graph distances.

use serde::{Deserialize, Serialize};

use crate::sets::{
    delta_k, fit_geometric_rate, kuratowski_check, AmbientBox, KuratowskiReport, Multigraph,
    PointCloud, RateFit, Sampled, SampledCompact, SetError,
};
use crate::Complex;

/// Division guard in [`fiberwise_constant_probe`].
pub const PROBE_FLOOR: f64 = 1e-15;
/// Allowed relative deviation of the probed constant from `2^{k-1}/k^2`.
pub const PROBE_REL_TOL: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DemoError {
    #[error("k_max must be at least 2, got {0}")]
    KMax(usize),
    #[error("mesh {mesh:e} does not resolve the finest step; need at most {needed:e}")]
    InsufficientMesh { mesh: f64, needed: f64 },
    #[error("invalid demo input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Set(#[from] SetError),
}

/// Piecewise-linear `f` on `[0, 1]` through `(a_k, b_k)` with
/// `a_k = a_{k-1} + 2^{-k}`, `b_k = b_{k-1} + 1/k^2`, and its perturbations `f_k`.
///
/// `f_k` agrees with `f` except on the `k`-th step `[a_{k-1}, a_k]`, where it
/// climbs to `b_k` by the midpoint and then stays flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Staircase {
    pub k_max: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn build_counterexample(k_max: usize) -> Result<Staircase, DemoError> {
    if k_max < 2 {
        return Err(DemoError::KMax(k_max));
    }
    let mut a = vec![0.0];
    let mut b = vec![0.0];
    for k in 1..=k_max {
        a.push(a[k - 1] + 0.5f64.powi(k as i32));
        b.push(b[k - 1] + 1.0 / (k * k) as f64);
    }
    Ok(Staircase { k_max, a, b })
}

fn lerp(x0: f64, y0: f64, x1: f64, y1: f64, x: f64) -> f64 {
    y0 + (x - x0) * (y1 - y0) / (x1 - x0)
}

impl Staircase {
    /// `f(1) = π²/6`.
    pub const LIMIT: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

    pub fn f(&self, x: f64) -> f64 {
        let last = self.k_max;
        if x >= self.a[last] {
            return lerp(self.a[last], self.b[last], 1.0, Self::LIMIT, x.min(1.0));
        }
        let j = self.a.partition_point(|&ak| ak <= x).clamp(1, last);
        lerp(self.a[j - 1], self.b[j - 1], self.a[j], self.b[j], x)
    }

    /// Step on which `f_k` differs from `f`.
    pub fn modified_interval(&self, k: usize) -> (f64, f64) {
        (self.a[k - 1], self.a[k])
    }

    pub fn f_k(&self, k: usize, x: f64) -> f64 {
        let (lo, hi) = self.modified_interval(k);
        if x < lo || x > hi {
            return self.f(x);
        }
        let mid = (lo + hi) / 2.0;
        if x <= mid {
            lerp(lo, self.b[k - 1], mid, self.b[k], x)
        } else {
            self.b[k]
        }
    }

    /// `||f - f_k||` on `[0, 1]`, attained at the midpoint of the modified step.
    pub fn sup_norm(&self, k: usize) -> f64 {
        let (lo, hi) = self.modified_interval(k);
        let mid = (lo + hi) / 2.0;
        (self.f_k(k, mid) - self.f(mid)).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub k: usize,
    pub sup_norm: f64,
    pub sampled_sup: f64,
    pub graph_dh: f64,
    /// `δ / d_H` for the sampled pair of graphs.
    pub c_est: f64,
    /// `2^{k-1} / k^2`.
    pub c_target: f64,
    /// `|sup_norm - 1/(2k^2)| <= 1e-9`.
    pub sup_exact: bool,
    /// `graph_dh <= 2^{-k} + 2 mesh`.
    pub dh_bound: bool,
}

impl CounterexampleRow {
    /// `c_est` within [`PROBE_REL_TOL`] of `2^{k-1}/k^2`.
    pub fn probe_matches(&self) -> bool {
        (self.c_est - self.c_target).abs() <= PROBE_REL_TOL * self.c_target
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleTable {
    pub k_max: usize,
    /// Sampling step actually used, a power of two not above the requested mesh.
    pub mesh: f64,
    pub rows: Vec<CounterexampleRow>,
    pub fit_sup: RateFit,
    pub fit_graph: RateFit,
}

impl CounterexampleTable {
    /// Per-row identities plus the rate dichotomy.
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.sup_exact && r.dh_bound)
            && self.fit_graph.is_geometric()
            && !self.fit_sup.is_geometric()
    }
}

/// Sup norms and sampled graph distances for `k = 2..=k_max`.
pub fn counterexample_rates(k_max: usize, mesh: f64) -> Result<CounterexampleTable, DemoError> {
    let st = build_counterexample(k_max)?;
    let needed = 0.5f64.powi(k_max as i32) / 8.0;
    if !(mesh > 0.0 && mesh <= needed) {
        return Err(DemoError::InsufficientMesh { mesh, needed });
    }
    // a dyadic step puts every breakpoint and midpoint on the grid
    let h = 2f64.powi(mesh.log2().floor() as i32);
    let count = (1.0 / h).round() as usize + 1;
    let base = SampledCompact::segment(0.0, 1.0, count)?;
    let xs: Vec<f64> = base.points().iter().map(|p| p[0].re).collect();
    let graph = |g: &dyn Fn(f64) -> f64| -> Result<Multigraph, SetError> {
        let values: Vec<Complex> = xs.iter().map(|&x| Complex::new(g(x), 0.0)).collect();
        Multigraph::graph_of(base.clone(), &values)
    };
    let f_graph = graph(&|x| st.f(x))?;

    let rows = (2..=k_max)
        .map(|k| {
            let fk_graph = graph(&|x| st.f_k(k, x))?;
            let probe = fiberwise_constant_probe(&f_graph, &fk_graph)?;
            let sup_norm = st.sup_norm(k);
            let graph_dh = probe.graph_dh;
            Ok(CounterexampleRow {
                k,
                sup_norm,
                sampled_sup: probe.delta,
                graph_dh,
                c_est: probe.c_est,
                c_target: 2f64.powi(k as i32 - 1) / (k * k) as f64,
                sup_exact: (sup_norm - 0.5 / (k * k) as f64).abs() <= 1e-9,
                dh_bound: graph_dh <= 0.5f64.powi(k as i32) + 2.0 * h,
            })
        })
        .collect::<Result<Vec<_>, DemoError>>()?;
    let column = |pick: fn(&CounterexampleRow) -> f64| -> Vec<(u32, f64)> {
        rows.iter().map(|r| (r.k as u32, pick(r))).collect()
    };
    Ok(CounterexampleTable {
        k_max,
        mesh: h,
        fit_sup: fit_geometric_rate(&column(|r| r.sup_norm)),
        fit_graph: fit_geometric_rate(&column(|r| r.graph_dh)),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberwiseConstant {
    pub delta: f64,
    pub graph_dh: f64,
    pub c_est: f64,
}

/// Smallest `C` with `δ_K(F, G) <= C d_H(graph F, graph G)` on the samples.
pub fn fiberwise_constant_probe(f: &Multigraph, g: &Multigraph) -> Result<FiberwiseConstant, DemoError> {
    let report = delta_k(f, g)?;
    Ok(FiberwiseConstant {
        delta: report.delta,
        graph_dh: report.graph_dh,
        c_est: report.delta / report.graph_dh.max(PROBE_FLOOR),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub nu: Vec<f64>,
    pub kuratowski: KuratowskiReport,
    /// Half-heights `T` of the boxes `|t| <= T` used for the fiber count.
    pub heights: Vec<f64>,
    /// Points of the sampled limit over `x = 1/2` inside each box.
    pub limit_fiber_counts: Vec<usize>,
    pub fibers_grow: bool,
}

impl ClosureReport {
    pub fn passed(&self) -> bool {
        self.kuratowski.passed() && self.fibers_grow
    }
}

/// Samples of `W_nu = {(x, nu (x^2 - 1/4)) : |x| <= 1}` in real `(x, t)`
/// coordinates, inside `|t| <= t_max`. Both an `x`-grid and a `t`-grid are
/// used, so consecutive samples along the curve are at most `sqrt 2 · step`
/// apart however steep it gets.
pub fn closure_sample(nu: f64, t_max: f64, step: f64) -> PointCloud {
    let mut c = PointCloud::new(2);
    let nx = (2.0 / step).round() as i64;
    for i in 0..=nx {
        let x = -1.0 + 2.0 * i as f64 / nx as f64;
        let t = nu * (x * x - 0.25);
        if t.abs() <= t_max {
            c.push(&[x, t]);
        }
    }
    let nt = (2.0 * t_max / step).round() as i64;
    for i in 0..=nt {
        let t = -t_max + 2.0 * t_max * i as f64 / nt as f64;
        let s = 0.25 + t / nu;
        if s >= 0.0 && s.sqrt() <= 1.0 {
            c.push(&[s.sqrt(), t]);
            c.push(&[-s.sqrt(), t]);
        }
    }
    c
}

fn vertical(x: f64, lo: f64, hi: f64, step: f64) -> PointCloud {
    let n = ((hi - lo) / step).round().max(1.0) as i64;
    let mut c = PointCloud::new(2);
    for i in 0..=n {
        c.push(&[x, lo + (hi - lo) * i as f64 / n as f64]);
    }
    c
}

/// `W_nu` against the two vertical lines `{±1/2} × ℝ`, clipped to `ambient`.
///
/// `ambient` is a box in `(x, t)`; its `t`-range must be symmetric. Fiber
/// counts of the limit are reported for the boxes `|t| <= T` with `T` the
/// box height times 1, 2, 4, 8.
pub fn closure_failure_demo(
    nu_list: &[f64],
    ambient: &AmbientBox,
    step: f64,
    tol: f64,
) -> Result<ClosureReport, DemoError> {
    if ambient.lo.len() != 2 || ambient.hi.len() != 2 {
        return Err(DemoError::Invalid("the ambient box lives in (x, t)".into()));
    }
    let t_max = ambient.hi[1];
    if !(t_max > 0.0) || ambient.lo[1] != -t_max {
        return Err(DemoError::Invalid("the box must be |t| <= T with T > 0".into()));
    }
    if !(step > 0.0) || nu_list.iter().any(|nu| !(*nu > 0.0)) {
        return Err(DemoError::Invalid("step and every nu must be positive".into()));
    }
    let curve_mesh = std::f64::consts::SQRT_2 * step;
    // a margin beyond the box so clipping does not open gaps at its edge
    let seq: Vec<Sampled> = nu_list
        .iter()
        .map(|&nu| Sampled::new(closure_sample(nu, t_max + 2.0 * step, step), curve_mesh))
        .collect();
    let mut lines = vertical(0.5, -t_max, t_max, step);
    for p in vertical(-0.5, -t_max, t_max, step).iter() {
        lines.push(p);
    }
    let limit = Sampled::new(lines, step);
    let witnesses: Vec<Sampled> = [0.0, -0.9, 0.9]
        .iter()
        .map(|&x| Sampled::new(vertical(x, -t_max, t_max, step), step))
        .collect();
    let kuratowski = kuratowski_check(&seq, &limit, &witnesses, ambient, tol)?;

    let heights: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().map(|s| s * t_max).collect();
    let limit_fiber_counts: Vec<usize> = heights
        .iter()
        .map(|&h| {
            vertical(0.5, -h, h, step)
                .clipped(&[0.5, -h], &[0.5, h])
                .len()
        })
        .collect();
    let fibers_grow = limit_fiber_counts.windows(2).all(|w| w[1] > w[0]);
    Ok(ClosureReport {
        nu: nu_list.to_vec(),
        kuratowski,
        heights,
        limit_fiber_counts,
        fibers_grow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakpoints() {
        let s = build_counterexample(4).unwrap();
        assert_eq!(&s.a[..3], &[0.0, 0.5, 0.75]);
        assert_eq!(&s.b[..3], &[0.0, 1.0, 1.25]);
        assert!((s.f(1.0) - 1.644_934_066_848_226_4).abs() < 1e-15);
        assert!(build_counterexample(1).is_err());
        for k in 1..=4 {
            assert!((s.a[k] - (1.0 - 0.5f64.powi(k as i32))).abs() == 0.0);
            assert_eq!(s.f(s.a[k]), s.b[k]);
        }
    }

    #[test]
    fn perturbation_is_local() {
        let s = build_counterexample(6).unwrap();
        for k in 1..=6 {
            let (lo, hi) = s.modified_interval(k);
            for i in 0..=200 {
                let x = i as f64 / 200.0;
                if x < lo || x > hi {
                    assert_eq!(s.f(x), s.f_k(k, x));
                }
            }
            assert_eq!(s.f_k(k, lo), s.f(lo));
            assert_eq!(s.f_k(k, hi), s.f(hi));
        }
        assert_eq!(s.sup_norm(2), 0.125);
    }

    #[test]
    fn coarse_mesh_rejected() {
        assert!(matches!(
            counterexample_rates(4, 0.1),
            Err(DemoError::InsufficientMesh { .. })
        ));
    }

    #[test]
    fn shifted_fibers_give_unit_constant() {
        let k = SampledCompact::segment(-1.0, 1.0, 41).unwrap();
        let values: Vec<Complex> = k.points().iter().map(|x| x[0] * x[0]).collect();
        let f = Multigraph::graph_of(k, &values).unwrap();
        let g = f.translated(Complex::new(0.0, 0.3));
        let c = fiberwise_constant_probe(&f, &g).unwrap();
        assert!((c.c_est - 1.0).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn closure_points() {
        let c = closure_sample(100.0, 30.0, 0.5);
        assert!(c.iter().any(|p| p == [0.5, 0.0]));
        assert!(c.iter().any(|p| p == [0.0, -25.0]));
    }
}
