//! Polynomials, closed-form coefficient functions and monic pseudopolynomials.

mod expr;
mod polynomial;

pub use expr::{EvalError, Expr, DEFAULT_POLE_GUARD};
pub use polynomial::{Exponent, Polynomial};

use serde::{Deserialize, Serialize};

use crate::Complex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("expression syntax: {0}")]
    ExprSyntax(String),
    #[error("coefficient a_{index} failed to evaluate: {source}")]
    CoefficientEval { index: usize, source: EvalError },
    #[error("a pseudopolynomial needs fiber degree n >= 1")]
    EmptyPseudopolynomial,
}

/// `F(x, t) = t^n + a_1(x) t^{n-1} + ... + a_n(x)`, monic in the fiber variable `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Expr>", into = "Vec<Expr>")]
pub struct Pseudopolynomial {
    coeffs: Vec<Expr>,
}

impl Pseudopolynomial {
    /// `coeffs` are `a_1, ..., a_n`; the leading coefficient is implicitly 1.
    pub fn new(coeffs: Vec<Expr>) -> Result<Self, AlgebraError> {
        if coeffs.is_empty() {
            return Err(AlgebraError::EmptyPseudopolynomial);
        }
        Ok(Self { coeffs })
    }

    pub fn from_polynomials(coeffs: Vec<Polynomial>) -> Result<Self, AlgebraError> {
        Self::new(coeffs.into_iter().map(Expr::Poly).collect())
    }

    /// Fiber degree `n`.
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    /// `(a_1(x), ..., a_n(x))`; prepend the implicit 1 to get `F(x, .)`.
    pub fn fiber_coeffs(&self, x: &[Complex]) -> Result<Vec<Complex>, AlgebraError> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| {
                a.eval(x).map_err(|source| AlgebraError::CoefficientEval {
                    index: j + 1,
                    source,
                })
            })
            .collect()
    }
}

impl TryFrom<Vec<Expr>> for Pseudopolynomial {
    type Error = AlgebraError;

    fn try_from(v: Vec<Expr>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<Pseudopolynomial> for Vec<Expr> {
    fn from(p: Pseudopolynomial) -> Self {
        p.coeffs
    }
}

/// Coefficients `(a_1, ..., a_n)` of the monic polynomial `prod (t - r_i)`.
///
/// Roots are put in a canonical order first so the result does not depend on
/// the order in which they are given.
pub fn vieta_from_roots(roots: &[Complex]) -> Vec<Complex> {
    let mut sorted = roots.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    // poly[k] is the coefficient of t^{len-k}, poly[0] = 1
    let mut poly = vec![Complex::new(1.0, 0.0)];
    for r in sorted {
        poly.push(Complex::new(0.0, 0.0));
        for k in (1..poly.len()).rev() {
            let prev = poly[k - 1];
            poly[k] -= r * prev;
        }
    }
    poly.remove(0);
    poly
}

/// Degree bound of `t^n + a_1 t^{n-1} + ... + a_n` when every `deg a_j <= d`.
pub fn assembled_degree_bound(d: u32, n: u32) -> u32 {
    n.max(d + n - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn fiber_coeffs_of_t2_minus_exp() {
        let f = Pseudopolynomial::new(vec![
            Expr::constant(0.0),
            Expr::neg(Expr::exp(Expr::coord(0))),
        ])
        .unwrap();
        assert_eq!(f.fiber_coeffs(&[c(0.0)]).unwrap(), vec![c(0.0), c(-1.0)]);
    }

    #[test]
    fn fiber_coeffs_of_constant_families() {
        let t = Pseudopolynomial::new(vec![Expr::constant(0.0)]).unwrap();
        assert_eq!(t.fiber_coeffs(&[c(7.0)]).unwrap(), vec![c(0.0)]);
        let sq = Pseudopolynomial::new(vec![Expr::constant(2.0), Expr::constant(1.0)]).unwrap();
        assert_eq!(sq.fiber_coeffs(&[c(-3.0)]).unwrap(), vec![c(2.0), c(1.0)]);
    }

    #[test]
    fn failing_coefficient_names_its_index() {
        let f = Pseudopolynomial::new(vec![
            Expr::constant(1.0),
            Expr::Recip {
                den: Polynomial::variable(1, 0),
                guard: DEFAULT_POLE_GUARD,
            },
        ])
        .unwrap();
        match f.fiber_coeffs(&[c(0.0)]) {
            Err(AlgebraError::CoefficientEval { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected pole error, got {other:?}"),
        }
    }

    #[test]
    fn empty_pseudopolynomial_rejected() {
        assert_eq!(
            Pseudopolynomial::new(vec![]),
            Err(AlgebraError::EmptyPseudopolynomial)
        );
        assert!(serde_json::from_str::<Pseudopolynomial>("[]").is_err());
    }

    #[test]
    fn vieta_small_cases() {
        assert_eq!(vieta_from_roots(&[c(1.0), c(2.0)]), vec![c(-3.0), c(2.0)]);
        assert!(vieta_from_roots(&[]).is_empty());
        assert_eq!(
            vieta_from_roots(&[c(1.0), c(2.0), c(3.0)]),
            vec![c(-6.0), c(11.0), c(-6.0)]
        );
    }

    #[test]
    fn degree_bound_cases() {
        assert_eq!(assembled_degree_bound(5, 3), 7);
        assert!(assembled_degree_bound(5, 3) <= 2 * 5 - 1);
        assert_eq!(assembled_degree_bound(0, 1), 1);
        assert_eq!(assembled_degree_bound(4, 4), 7);
        for n in 1..10 {
            for d in n..40 {
                assert!(assembled_degree_bound(d, n) <= 2 * d - 1);
            }
        }
    }
}
