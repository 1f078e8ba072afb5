use bws_core::algebra::{Expr, Polynomial, Pseudopolynomial};
use bws_core::converse::{
    converse_experiment, detect_covering_number, reconstruct_coefficients, ConverseVerdict,
};
use bws_core::demos::{build_counterexample, closure_sample, counterexample_rates};
use bws_core::forward::{forward_rate_experiment, ForwardExperiment};
use bws_core::roots::DEFAULT_TOL;
use bws_core::sets::{Multigraph, SampledCompact};
use bws_core::Complex;

fn t2_minus_exp() -> Pseudopolynomial {
    Pseudopolynomial::new(vec![Expr::constant(0.0), Expr::neg(Expr::exp(Expr::coord(0)))]).unwrap()
}

fn exp_experiment() -> ForwardExperiment {
    let k = SampledCompact::segment(-1.0, 1.0, 201).unwrap();
    forward_rate_experiment(&t2_minus_exp(), &k, &(2..=12).collect::<Vec<_>>()).unwrap()
}

fn with_degrees(e: &ForwardExperiment) -> Vec<(u32, Multigraph)> {
    e.d_range.iter().copied().zip(e.v_k.iter().cloned()).collect()
}

#[test]
fn vieta_recovers_the_approximant_coefficients() {
    let e = exp_experiment();
    for (rec, w) in e.records.iter().zip(&e.v_k) {
        let recovered = reconstruct_coefficients(w, e.n).unwrap();
        for (x, a) in e.k.points().iter().zip(&recovered) {
            for j in 0..e.n {
                let exact = rec.expansions[j].eval(x);
                let scale = exact.norm().max(1.0);
                assert!(
                    (a[j] - exact).norm() <= 10.0 * DEFAULT_TOL * scale,
                    "d={} a_{}: {:e}",
                    rec.d,
                    j + 1,
                    (a[j] - exact).norm()
                );
            }
        }
    }
}

#[test]
fn forward_then_converse_round_trip() {
    let e = exp_experiment();
    let delta: Vec<f64> = e.records.iter().map(|r| r.delta).collect();
    let r = converse_experiment(&e.x_k, &with_degrees(&e), 2, &delta, None).unwrap();
    assert_eq!(r.verdict, ConverseVerdict::HolomorphicWitness);
    assert_eq!(r.n_detected, 2);
    assert!(r.records.iter().all(|x| x.lemma_ok));
    assert!(r.coeff_rate_envelope);
    assert!(r.sqrt_theta_geometric);
    assert!(r.cauchy_geometric);
    let recon = r.reconstructed.as_ref().unwrap();
    assert_eq!(recon.degree(), 2);
    // a_1 = 0 and a_2 = -e^x, up to the coefficient error at the top degree
    let top = r.records.last().unwrap();
    let env = top.coeff_sup_errors.iter().copied().fold(0.0, f64::max) + 1e-12;
    for x in e.k.points().iter().step_by(20) {
        let c = recon.fiber_coeffs(x).unwrap();
        assert!(c[0].norm() <= env + 1e-10);
        assert!((c[1] + x[0].exp()).norm() <= env + 1e-10, "{x:?}");
    }
}

#[test]
fn double_root_point_fails_separation() {
    // t^2 - x^2 has the double root t = 0 over x = 0
    let x2 = Polynomial::monomial(1, vec![2], Complex::new(-1.0, 0.0));
    let f = Pseudopolynomial::from_polynomials(vec![Polynomial::zero(1), x2]).unwrap();
    let k = SampledCompact::segment(-1.0, 1.0, 41).unwrap();
    let e = forward_rate_experiment(&f, &k, &(2..=7).collect::<Vec<_>>()).unwrap();
    let w = with_degrees(&e);
    let zero = 20;
    assert!(e.k.points()[zero][0].norm() < 1e-15);
    assert!(detect_covering_number(&w, 2, Some(zero)).is_err());
    let r = detect_covering_number(&w, 2, Some(35)).unwrap();
    assert_eq!((r.n, r.x0), (2, 35));
}

#[test]
fn staircase_sup_norm_ratios() {
    let s = build_counterexample(10).unwrap();
    for k in 2..10 {
        let ratio = s.sup_norm(k + 1) / s.sup_norm(k);
        let exact = (k * k) as f64 / ((k + 1) * (k + 1)) as f64;
        assert!((ratio - exact).abs() < 1e-12);
    }
}

#[test]
fn staircase_table() {
    let t = counterexample_rates(6, 0.5f64.powi(6) / 16.0).unwrap();
    assert_eq!(t.rows[0].sup_norm, 0.125);
    let k4 = &t.rows[2];
    assert_eq!(k4.k, 4);
    assert!(k4.graph_dh <= 1.0 / 16.0 + 2.0 * t.mesh);
    // the probe is never below the universal lower bound
    assert!(t.rows.iter().all(|r| r.c_est >= 1.0 - 1e-12));
    let c3 = t.rows.iter().find(|r| r.k == 3).unwrap().c_est;
    let c6 = t.rows.iter().find(|r| r.k == 6).unwrap().c_est;
    assert!(c6 > c3, "{c3} {c6}");
}

#[test]
fn closure_curve_samples() {
    let c = closure_sample(100.0, 30.0, 0.25);
    assert!(c.iter().any(|p| p == [0.5, 0.0]));
    assert!(c.iter().any(|p| p == [0.0, -25.0]));
    // the vertex at x = 0 leaves any fixed box as nu grows
    let far = closure_sample(1000.0, 30.0, 0.25);
    assert!(far.iter().all(|p| p[0].abs() > 0.4));
}
