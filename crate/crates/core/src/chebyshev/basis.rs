use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{Exponent, Polynomial};
use crate::Complex;

/// Per-coordinate univariate basis after an affine change of variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordMap {
    /// `T_k(u)` with `u = (2x - lo - hi) / (hi - lo)`; used when the samples of
    /// this coordinate are real.
    Chebyshev { lo: f64, hi: f64 },
    /// `w^k` with `w = (x - center) / scale`.
    Power { center: Complex, scale: f64 },
}

impl CoordMap {
    /// Chooses the basis for one coordinate from its sample values.
    pub fn fit(values: impl Iterator<Item = Complex> + Clone) -> Self {
        let (mut lo, mut hi, mut max_im, mut max_abs) =
            (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64);
        for z in values.clone() {
            lo = lo.min(z.re);
            hi = hi.max(z.re);
            max_im = max_im.max(z.im.abs());
            max_abs = max_abs.max(z.norm());
        }
        if max_im <= 1e-14 * max_abs.max(1.0) && hi > lo {
            return CoordMap::Chebyshev { lo, hi };
        }
        let (mut lo_im, mut hi_im) = (f64::INFINITY, f64::NEG_INFINITY);
        for z in values.clone() {
            lo_im = lo_im.min(z.im);
            hi_im = hi_im.max(z.im);
        }
        let center = Complex::new((lo + hi) / 2.0, (lo_im + hi_im) / 2.0);
        let scale = values.map(|z| (z - center).norm()).fold(0.0, f64::max);
        CoordMap::Power {
            center,
            scale: if scale > 0.0 { scale } else { 1.0 },
        }
    }

    fn local(&self, x: Complex) -> Complex {
        match *self {
            CoordMap::Chebyshev { lo, hi } => (2.0 * x - (lo + hi)) / (hi - lo),
            CoordMap::Power { center, scale } => (x - center) / scale,
        }
    }

    /// `b_0(x), ..., b_d(x)`.
    pub fn values(&self, x: Complex, d: usize, out: &mut Vec<Complex>) {
        out.clear();
        let u = self.local(x);
        let one = Complex::new(1.0, 0.0);
        out.push(one);
        if d == 0 {
            return;
        }
        out.push(u);
        for k in 2..=d {
            let next = match self {
                CoordMap::Chebyshev { .. } => 2.0 * u * out[k - 1] - out[k - 2],
                CoordMap::Power { .. } => u * out[k - 1],
            };
            out.push(next);
        }
    }

    /// Monomial coefficients in `x` (lowest first) of `b_0, ..., b_d`.
    fn monomial_forms(&self, d: usize) -> Vec<Vec<Complex>> {
        // u = alpha x + beta
        let (alpha, beta) = match *self {
            CoordMap::Chebyshev { lo, hi } => (
                Complex::new(2.0 / (hi - lo), 0.0),
                Complex::new(-(lo + hi) / (hi - lo), 0.0),
            ),
            CoordMap::Power { center, scale } => (Complex::new(1.0 / scale, 0.0), -center / scale),
        };
        let u = vec![beta, alpha];
        let mut forms: Vec<Vec<Complex>> = vec![vec![Complex::new(1.0, 0.0)]];
        if d >= 1 {
            forms.push(u.clone());
        }
        for k in 2..=d {
            let prod = mul_univariate(&u, &forms[k - 1]);
            let next = match self {
                CoordMap::Chebyshev { .. } => {
                    let mut p: Vec<Complex> = prod.iter().map(|c| 2.0 * c).collect();
                    for (i, c) in forms[k - 2].iter().enumerate() {
                        p[i] -= c;
                    }
                    p
                }
                CoordMap::Power { .. } => prod,
            };
            forms.push(next);
        }
        forms
    }
}

fn mul_univariate(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    let mut out = vec![Complex::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// All exponents in `m` variables of total degree `<= d`, graded then lexicographic.
pub fn exponents(m: usize, d: u32) -> Vec<Exponent> {
    let mut out = Vec::new();
    for total in 0..=d {
        let mut cur = vec![0u32; m];
        compositions(total, 0, &mut cur, &mut out);
    }
    out
}

fn compositions(rest: u32, v: usize, cur: &mut Vec<u32>, out: &mut Vec<Exponent>) {
    let m = cur.len();
    if m == 0 {
        if rest == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if v + 1 == m {
        cur[v] = rest;
        out.push(cur.clone());
        return;
    }
    for k in (0..=rest).rev() {
        cur[v] = k;
        compositions(rest - k, v + 1, cur, out);
    }
    cur[v] = 0;
}

/// `dim P_d(ℂ^m) = binom(m + d, d)`.
pub fn dim_polynomials(m: usize, d: u32) -> usize {
    (1..=m).fold(1usize, |acc, i| acc * (d as usize + i) / i)
}

/// A polynomial of total degree `<= d` stored in a tensor basis of rescaled
/// coordinates, which stays well conditioned at degrees where the monomial
/// form does not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisExpansion {
    pub maps: Vec<CoordMap>,
    pub degree: u32,
    pub exponents: Vec<Exponent>,
    pub coeffs: Vec<Complex>,
}

impl BasisExpansion {
    pub fn zero(maps: Vec<CoordMap>) -> Self {
        let m = maps.len();
        Self {
            maps,
            degree: 0,
            exponents: exponents(m, 0),
            coeffs: vec![Complex::new(0.0, 0.0)],
        }
    }

    pub fn eval(&self, x: &[Complex]) -> Complex {
        let d = self.degree as usize;
        let mut buf = Vec::with_capacity(d + 1);
        let tables: Vec<Vec<Complex>> = self
            .maps
            .iter()
            .zip(x)
            .map(|(map, &xv)| {
                map.values(xv, d, &mut buf);
                buf.clone()
            })
            .collect();
        self.exponents
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| {
                e.iter()
                    .zip(&tables)
                    .fold(*c, |acc, (&k, t)| acc * t[k as usize])
            })
            .sum()
    }

    /// Expansion in the monomials of the original coordinates.
    pub fn to_polynomial(&self) -> Polynomial {
        let m = self.maps.len();
        let d = self.degree as usize;
        let forms: Vec<Vec<Vec<Complex>>> = self.maps.iter().map(|mp| mp.monomial_forms(d)).collect();
        let mut acc: BTreeMap<Exponent, Complex> = BTreeMap::new();
        for (e, c) in self.exponents.iter().zip(&self.coeffs) {
            if *c == Complex::new(0.0, 0.0) {
                continue;
            }
            let mut partial: Vec<(Exponent, Complex)> = vec![(vec![0; m], *c)];
            for (v, &k) in e.iter().enumerate() {
                let form = &forms[v][k as usize];
                partial = partial
                    .into_iter()
                    .flat_map(|(exp, coef)| {
                        form.iter().enumerate().map(move |(p, fc)| {
                            let mut ex = exp.clone();
                            ex[v] = p as u32;
                            (ex, coef * fc)
                        })
                    })
                    .collect();
            }
            for (ex, coef) in partial {
                *acc.entry(ex).or_insert(Complex::new(0.0, 0.0)) += coef;
            }
        }
        Polynomial::new(m, acc).unwrap_or_else(|_| Polynomial::zero(m))
    }
}

/// Complex matrix `A[i][j] = phi_j(x_i)` for the given exponents.
pub fn design_matrix(maps: &[CoordMap], points: &[Vec<Complex>], exps: &[Exponent], d: u32) -> DMatrix<Complex> {
    let d = d as usize;
    let mut a = DMatrix::<Complex>::zeros(points.len(), exps.len());
    let mut buf = Vec::with_capacity(d + 1);
    for (i, x) in points.iter().enumerate() {
        let tables: Vec<Vec<Complex>> = maps
            .iter()
            .zip(x)
            .map(|(map, &xv)| {
                map.values(xv, d, &mut buf);
                buf.clone()
            })
            .collect();
        for (j, e) in exps.iter().enumerate() {
            a[(i, j)] = e
                .iter()
                .zip(&tables)
                .fold(Complex::new(1.0, 0.0), |acc, (&k, t)| acc * t[k as usize]);
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_enumeration() {
        let e = exponents(2, 2);
        assert_eq!(
            e,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(dim_polynomials(2, 2), 6);
        assert_eq!(dim_polynomials(1, 7), 8);
        assert_eq!(dim_polynomials(3, 4), 35);
        assert_eq!(exponents(3, 4).len(), 35);
    }

    #[test]
    fn monomial_conversion_matches_basis_evaluation() {
        let maps = vec![
            CoordMap::Chebyshev { lo: -1.0, hi: 3.0 },
            CoordMap::Power {
                center: Complex::new(0.5, -1.0),
                scale: 2.0,
            },
        ];
        let exps = exponents(2, 4);
        let coeffs: Vec<Complex> = (0..exps.len())
            .map(|i| Complex::new((i as f64).sin(), (i as f64 * 0.7).cos()))
            .collect();
        let b = BasisExpansion {
            maps,
            degree: 4,
            exponents: exps,
            coeffs,
        };
        let p = b.to_polynomial();
        for x in [
            [Complex::new(0.3, 0.0), Complex::new(1.0, 0.5)],
            [Complex::new(2.5, 0.1), Complex::new(-0.5, -2.0)],
        ] {
            assert!((p.eval(&x).unwrap() - b.eval(&x)).norm() < 1e-10);
        }
    }

    #[test]
    fn chebyshev_values() {
        let map = CoordMap::Chebyshev { lo: -1.0, hi: 1.0 };
        let mut out = Vec::new();
        map.values(Complex::new(0.5, 0.0), 3, &mut out);
        // T_3(1/2) = 4/8 - 3/2 = -1
        assert!((out[3] - Complex::new(-1.0, 0.0)).norm() < 1e-15);
    }
}
