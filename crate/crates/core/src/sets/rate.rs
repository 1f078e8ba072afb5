use serde::{Deserialize, Serialize};

/// Values at or below this are treated as exact zeros polluted by rounding.
pub const DEFAULT_FLOOR: f64 = 1e-13;
/// Largest fitted rate still accepted as geometric.
pub const THETA_MAX: f64 = 0.95;
/// Largest RMS log-residual of the tail line still accepted as geometric.
pub const RESIDUAL_MAX: f64 = 1.5;
/// Minimum number of non-floor entries for a verdict.
pub const MIN_USABLE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Geometric,
    NotGeometric,
    Inconclusive,
}

/// Fitted envelope `alpha_d <= M theta^d` and the evidence behind the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    #[serde(rename = "M")]
    pub m: f64,
    pub theta: f64,
    /// Rate of the least-squares line over all non-floor entries.
    pub theta_full: f64,
    /// RMS of the natural-log residuals of the tail line.
    pub residual: f64,
    /// Input positions whose value is at or below the floor.
    pub floor_mask: Vec<usize>,
    pub verdict: Verdict,
    /// `(d, alpha_d^{1/d})` for non-floor entries with `d >= 1`.
    pub root_sequence: Vec<(u32, f64)>,
    /// Max of `alpha_d^{1/d}` over the last third of the degree range.
    pub limsup_proxy: Option<f64>,
    /// Residual sums of squares of the tail window under `log a = c + d log theta`
    /// and under `log a = c - p log d`.
    pub linear_rss: f64,
    pub power_rss: Option<f64>,
    pub floor: f64,
}

impl RateFit {
    pub fn is_geometric(&self) -> bool {
        self.verdict == Verdict::Geometric
    }
}

/// [`fit_geometric_rate_with_floor`] at [`DEFAULT_FLOOR`].
pub fn fit_geometric_rate(alphas: &[(u32, f64)]) -> RateFit {
    fit_geometric_rate_with_floor(alphas, DEFAULT_FLOOR)
}

/// Fits `alpha_d ~ M theta^d` to a decay sequence.
///
/// `theta` comes from the least-squares line through `(d, ln alpha_d)` over the
/// tail window (the later half of the non-floor entries, at least
/// [`MIN_USABLE`] of them), so that early transients do not mask the
/// asymptotic rate. `M` is then raised until the envelope holds at every
/// non-floor entry. The verdict is geometric when `theta <= THETA_MAX`, the
/// tail line fits to within [`RESIDUAL_MAX`], and a power law `c d^{-p}` does
/// not explain the tail better than the exponential.
pub fn fit_geometric_rate_with_floor(alphas: &[(u32, f64)], floor: f64) -> RateFit {
    let floor_mask: Vec<usize> = alphas
        .iter()
        .enumerate()
        .filter(|(_, (_, a))| !(*a > floor))
        .map(|(i, _)| i)
        .collect();
    let usable: Vec<(f64, f64)> = alphas
        .iter()
        .filter(|(_, a)| *a > floor && a.is_finite())
        .map(|&(d, a)| (d as f64, a.ln()))
        .collect();
    let root_sequence: Vec<(u32, f64)> = alphas
        .iter()
        .filter(|(d, a)| *a > floor && *d >= 1)
        .map(|&(d, a)| (d, a.powf(1.0 / d as f64)))
        .collect();
    let limsup_proxy = limsup_proxy(alphas, floor);

    let base = RateFit {
        m: floor,
        theta: 0.0,
        theta_full: 0.0,
        residual: 0.0,
        floor_mask,
        verdict: Verdict::Geometric,
        root_sequence,
        limsup_proxy,
        linear_rss: 0.0,
        power_rss: None,
        floor,
    };
    if usable.is_empty() && !alphas.is_empty() {
        return base;
    }
    if usable.len() < MIN_USABLE {
        return RateFit {
            verdict: Verdict::Inconclusive,
            theta: f64::NAN,
            theta_full: f64::NAN,
            m: f64::NAN,
            ..base
        };
    }

    let (_, slope_full) = line_fit(&usable);
    let tail = &usable[usable.len() - (usable.len() / 2).max(MIN_USABLE)..];
    let (intercept, slope) = line_fit(tail);
    let theta = slope.exp().clamp(0.0, 1.0);
    let theta_full = slope_full.exp().clamp(0.0, 1.0);
    let log_theta = theta.ln();
    let log_m = usable
        .iter()
        .map(|&(d, la)| la - d * log_theta)
        .fold(intercept.min(f64::MAX), f64::max);

    let linear_rss: f64 = tail
        .iter()
        .map(|&(d, la)| (la - intercept - slope * d).powi(2))
        .sum();
    let residual = (linear_rss / tail.len() as f64).sqrt();
    let power_rss = {
        let pts: Vec<(f64, f64)> = tail
            .iter()
            .filter(|(d, _)| *d >= 1.0)
            .map(|&(d, la)| (d.ln(), la))
            .collect();
        (pts.len() >= 3).then(|| {
            let (c, p) = line_fit(&pts);
            pts.iter().map(|&(u, la)| (la - c - p * u).powi(2)).sum::<f64>()
        })
    };
    let power_law_wins = power_rss.is_some_and(|p| p < linear_rss);
    let verdict = if theta <= THETA_MAX && residual <= RESIDUAL_MAX && !power_law_wins {
        Verdict::Geometric
    } else {
        Verdict::NotGeometric
    };
    RateFit {
        m: log_m.exp(),
        theta,
        theta_full,
        residual,
        verdict,
        linear_rss,
        power_rss,
        ..base
    }
}

fn limsup_proxy(alphas: &[(u32, f64)], floor: f64) -> Option<f64> {
    let (lo, hi) = alphas
        .iter()
        .fold((u32::MAX, 0u32), |(lo, hi), &(d, _)| (lo.min(d), hi.max(d)));
    if alphas.is_empty() {
        return None;
    }
    let start = hi - (hi - lo) / 3;
    alphas
        .iter()
        .filter(|(d, _)| *d >= start && *d >= 1)
        .map(|&(d, a)| if a > floor { a.powf(1.0 / d as f64) } else { 0.0 })
        .reduce(f64::max)
}

/// Ordinary least squares `y = c + s x`; returns `(c, s)`.
fn line_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let s = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - s * mx, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_geometric_sequence() {
        let a: Vec<_> = (1..=20).map(|d| (d, 0.5f64.powi(d as i32))).collect();
        let fit = fit_geometric_rate(&a);
        assert!((fit.theta - 0.5).abs() < 1e-10);
        assert!((fit.m - 1.0).abs() < 1e-8);
        assert_eq!(fit.verdict, Verdict::Geometric);
    }

    #[test]
    fn inverse_square_is_not_geometric() {
        let mut last = 0.0;
        for top in [50u32, 100, 200] {
            let a: Vec<_> = (1..=top).map(|d| (d, 1.0 / (d as f64).powi(2))).collect();
            let fit = fit_geometric_rate(&a);
            assert_eq!(fit.verdict, Verdict::NotGeometric);
            assert!(fit.theta > last, "{}", fit.theta);
            last = fit.theta;
        }
        // the local rate at d is exp(-2/d), so 0.97 is only cleared at the longest range
        assert!(last >= 0.97, "{last}");
    }

    #[test]
    fn all_floor_and_too_few() {
        let fit = fit_geometric_rate(&[(1, 1e-14), (2, 0.0), (3, 1e-15)]);
        assert_eq!(fit.verdict, Verdict::Geometric);
        assert_eq!(fit.theta, 0.0);
        assert_eq!(fit.floor_mask, vec![0, 1, 2]);
        let fit = fit_geometric_rate(&[(1, 0.1), (2, 0.01), (3, 0.0)]);
        assert_eq!(fit.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn envelope_holds() {
        let a: Vec<_> = (0..30)
            .map(|d| (d, 0.7f64.powi(d as i32) * (1.0 + 0.5 * ((d * 7 % 5) as f64))))
            .collect();
        let fit = fit_geometric_rate(&a);
        for &(d, x) in &a {
            assert!(x <= fit.m * fit.theta.powi(d as i32) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn limsup_proxy_uses_last_third() {
        let a: Vec<_> = (1..=9).map(|d| (d, 0.5f64.powi(d as i32))).collect();
        let fit = fit_geometric_rate(&a);
        assert!((fit.limsup_proxy.unwrap() - 0.5).abs() < 1e-12);
    }
}
