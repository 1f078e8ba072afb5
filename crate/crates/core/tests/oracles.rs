//! Checks against answers computed by independent means.

use bws_core::algebra::{vieta_from_roots, Polynomial};
use bws_core::chebyshev::{best_approx, Mode};
use bws_core::roots::{match_roots, solve_monic, DEFAULT_TOL};
use bws_core::sets::{hausdorff, PointCloud, SampledCompact};
use bws_core::Complex;
use itertools::Itertools;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_complex(rng: &mut ChaCha8Rng, radius: f64) -> Complex {
    Complex::new(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius))
}

/// Eigenvalues of the companion matrix of `t^n + a_1 t^{n-1} + ... + a_n`.
fn companion_roots(a: &[Complex]) -> Vec<Complex> {
    let n = a.len();
    let mut m = DMatrix::<Complex>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -a[j];
    }
    for i in 1..n {
        m[(i, i - 1)] = Complex::new(1.0, 0.0);
    }
    m.schur().eigenvalues().expect("complex Schur form").iter().copied().collect()
}

#[test]
fn solver_agrees_with_companion_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cubic = [-6.0, 11.0, -6.0].map(|x| Complex::new(x, 0.0));
    let r = solve_monic(&cubic, DEFAULT_TOL).unwrap();
    assert!(match_roots(&r.roots, &companion_roots(&cubic)).unwrap().bottleneck < 1e-10);
    for n in 1..=8 {
        for _ in 0..25 {
            let a: Vec<Complex> = (0..n).map(|_| random_complex(&mut rng, 3.0)).collect();
            let ours = solve_monic(&a, DEFAULT_TOL).unwrap();
            let oracle = companion_roots(&a);
            let m = match_roots(&ours.roots, &oracle).unwrap();
            assert!(m.bottleneck < 1e-7, "n={n}: {a:?} bottleneck {}", m.bottleneck);
        }
    }
}

#[test]
fn bottleneck_equals_permutation_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 1..=8 {
        let trials = if n == 8 { 3 } else { 20 };
        for _ in 0..trials {
            let a: Vec<Complex> = (0..n).map(|_| random_complex(&mut rng, 2.0)).collect();
            let b: Vec<Complex> = (0..n).map(|_| random_complex(&mut rng, 2.0)).collect();
            let brute = (0..n)
                .permutations(n)
                .map(|p| p.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).norm()).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            let m = match_roots(&a, &b).unwrap();
            assert_eq!(m.bottleneck, brute, "n={n}");
        }
    }
}

#[test]
fn vieta_matches_expanded_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in 1..=6 {
        let roots: Vec<Complex> = (0..n).map(|_| random_complex(&mut rng, 2.0)).collect();
        // expand prod (t - r_i) with the polynomial type
        let mut p = Polynomial::constant(1, Complex::new(1.0, 0.0));
        for &r in &roots {
            p = p.mul(&Polynomial::univariate(&[-r, Complex::new(1.0, 0.0)])).unwrap();
        }
        let v = vieta_from_roots(&roots);
        for (j, c) in v.iter().enumerate() {
            let expected = p.coefficient(&[(n - 1 - j) as u32]);
            assert!((c - expected).norm() < 1e-12, "n={n}, a_{}", j + 1);
        }
    }
}

#[test]
fn hausdorff_matches_naive_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for (na, nb) in [(1, 1), (5, 9), (300, 200), (12_000, 50)] {
        let pts = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.0..0.1)])
                .collect()
        };
        let a = pts(&mut rng, na);
        let b = pts(&mut rng, nb);
        let directed = |x: &[Vec<f64>], y: &[Vec<f64>]| {
            x.iter()
                .map(|p| {
                    y.iter()
                        .map(|q| p.iter().zip(q).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        let naive = directed(&a, &b).max(directed(&b, &a));
        let ours = hausdorff(&PointCloud::from_rows(3, &a), &PointCloud::from_rows(3, &b), None).unwrap();
        assert!((ours - naive).abs() <= 1e-14, "{na}x{nb}: {ours} vs {naive}");
    }
}

#[test]
fn minimax_of_abs_degree_two() {
    // best quadratic for |x| on [-1, 1] is x^2 + 1/8, equioscillating at 0, ±1/2, ±1
    let k = SampledCompact::segment(-1.0, 1.0, 401).unwrap();
    let v: Vec<Complex> = k.points().iter().map(|x| Complex::new(x[0].re.abs(), 0.0)).collect();
    let r = best_approx(&k, &v, 2, Mode::Minimax).unwrap();
    assert!((r.error - 0.125).abs() < 1e-12, "{}", r.error);
    let p = r.poly;
    assert!((p.coefficient(&[2]) - Complex::new(1.0, 0.0)).norm() < 1e-9);
    assert!((p.coefficient(&[0]) - Complex::new(0.125, 0.0)).norm() < 1e-9);
}

#[test]
fn monic_chebyshev_deviation() {
    // the error of the best degree n-1 approximation to x^n on [-1, 1] is 2^{1-n};
    // the nodes cos(j pi / 840) contain the extrema of every T_n with n | 840
    let nodes: Vec<Complex> = (0..=840)
        .map(|j| Complex::new((j as f64 * std::f64::consts::PI / 840.0).cos(), 0.0))
        .collect();
    let k = SampledCompact::from_complex(&nodes, std::f64::consts::PI / 1680.0).unwrap();
    for n in 2..=7 {
        let v: Vec<Complex> = k.points().iter().map(|x| x[0].powi(n)).collect();
        let r = best_approx(&k, &v, n as u32 - 1, Mode::Minimax).unwrap();
        let expected = 2f64.powi(1 - n);
        assert!((r.error - expected).abs() < 1e-9 * expected, "n={n}: {} vs {expected}", r.error);
    }
}

#[test]
fn power_minimax_on_the_disc() {
    // z^n on the unit disc: every polynomial of lower degree is no closer than 1
    let k = SampledCompact::disc(Complex::new(0.0, 0.0), 1.0, 0.1).unwrap();
    let v: Vec<Complex> = k.points().iter().map(|x| x[0].powi(3)).collect();
    let r = best_approx(&k, &v, 2, Mode::Minimax).unwrap();
    assert!((r.error - 1.0).abs() < 2e-3, "{}", r.error);
}
