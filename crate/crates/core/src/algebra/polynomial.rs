use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AlgebraError;
use crate::Complex;

/// Exponent vector of a monomial, one entry per variable.
pub type Exponent = Vec<u32>;

/// Graded-lexicographic order: total degree first, then lexicographic.
fn grlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

#[derive(Clone, PartialEq, Eq)]
struct GrlexKey(Exponent);

impl PartialOrd for GrlexKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GrlexKey {
    fn cmp(&self, other: &Self) -> Ordering {
        grlex(&self.0, &other.0)
    }
}

/// A complex polynomial in `num_vars` variables stored as a dense term list.
///
/// Terms are kept in graded-lexicographic order with no duplicate exponents and
/// no zero coefficients, so structural equality is polynomial equality.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialJson", into = "PolynomialJson")]
pub struct Polynomial {
    num_vars: usize,
    terms: Vec<(Exponent, Complex)>,
}

impl Polynomial {
    /// Builds a polynomial from arbitrary terms, merging duplicates and dropping zeros.
    pub fn new(
        num_vars: usize,
        terms: impl IntoIterator<Item = (Exponent, Complex)>,
    ) -> Result<Self, AlgebraError> {
        let mut acc: BTreeMap<GrlexKey, Complex> = BTreeMap::new();
        for (exp, c) in terms {
            if exp.len() != num_vars {
                return Err(AlgebraError::DimensionMismatch {
                    expected: num_vars,
                    found: exp.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(AlgebraError::NonFinite);
            }
            *acc.entry(GrlexKey(exp)).or_insert(Complex::new(0.0, 0.0)) += c;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| *c != Complex::new(0.0, 0.0))
            .map(|(k, c)| (k.0, c))
            .collect();
        Ok(Self { num_vars, terms })
    }

    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: Vec::new(),
        }
    }

    pub fn constant(num_vars: usize, c: Complex) -> Self {
        Self::monomial(num_vars, vec![0; num_vars], c)
    }

    /// `c * x^exp`.
    pub fn monomial(num_vars: usize, exp: Exponent, c: Complex) -> Self {
        assert_eq!(exp.len(), num_vars, "exponent length must match num_vars");
        if c == Complex::new(0.0, 0.0) {
            return Self::zero(num_vars);
        }
        Self {
            num_vars,
            terms: vec![(exp, c)],
        }
    }

    /// The coordinate function `x_i` (zero-based).
    pub fn variable(num_vars: usize, i: usize) -> Self {
        let mut exp = vec![0; num_vars];
        exp[i] = 1;
        Self::monomial(num_vars, exp, Complex::new(1.0, 0.0))
    }

    /// Univariate polynomial from ascending coefficients `c_0 + c_1 t + ...`.
    pub fn univariate(coeffs: &[Complex]) -> Self {
        Self::new(
            1,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| (vec![k as u32], c)),
        )
        .expect("univariate terms are well formed")
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> &[(Exponent, Complex)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms
            .last()
            .map(|(e, _)| e.iter().map(|&k| k as i64).sum())
            .unwrap_or(-1)
    }

    /// Coefficient of `x^exp`, zero if absent.
    pub fn coefficient(&self, exp: &[u32]) -> Complex {
        self.terms
            .binary_search_by(|(e, _)| grlex(e, exp))
            .map(|i| self.terms[i].1)
            .unwrap_or(Complex::new(0.0, 0.0))
    }

    pub fn eval(&self, x: &[Complex]) -> Result<Complex, AlgebraError> {
        if x.len() != self.num_vars {
            return Err(AlgebraError::DimensionMismatch {
                expected: self.num_vars,
                found: x.len(),
            });
        }
        let max_exp = self
            .terms
            .iter()
            .flat_map(|(e, _)| e.iter().copied())
            .max()
            .unwrap_or(0) as usize;
        // powers[v][k] = x_v^k
        let powers: Vec<Vec<Complex>> = x
            .iter()
            .map(|&xv| {
                let mut p = Vec::with_capacity(max_exp + 1);
                let mut acc = Complex::new(1.0, 0.0);
                for _ in 0..=max_exp {
                    p.push(acc);
                    acc *= xv;
                }
                p
            })
            .collect();
        let mut sum = Complex::new(0.0, 0.0);
        for (exp, c) in &self.terms {
            let mut term = *c;
            for (v, &k) in exp.iter().enumerate() {
                term *= powers[v][k as usize];
            }
            sum += term;
        }
        Ok(sum)
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::new(
            self.num_vars,
            self.terms.iter().map(|(e, c)| (e.clone(), c * s)),
        )
        .expect("scaling preserves shape")
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_vars(other)?;
        Self::new(
            self.num_vars,
            self.terms.iter().chain(other.terms.iter()).cloned(),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(Complex::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_vars(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                terms.push((e, ca * cb));
            }
        }
        Self::new(self.num_vars, terms)
    }

    fn check_vars(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.num_vars != other.num_vars {
            return Err(AlgebraError::DimensionMismatch {
                expected: self.num_vars,
                found: other.num_vars,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for (v, &k) in e.iter().enumerate() {
                if k > 0 {
                    write!(f, "*x{v}^{k}")?;
                }
            }
        }
        Ok(())
    }
}

/// Wire form: `{"m": int, "terms": [[[e1,...,em],[re,im]], ...]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialJson {
    m: usize,
    terms: Vec<(Exponent, [f64; 2])>,
}

impl TryFrom<PolynomialJson> for Polynomial {
    type Error = AlgebraError;

    fn try_from(j: PolynomialJson) -> Result<Self, Self::Error> {
        Polynomial::new(
            j.m,
            j.terms
                .into_iter()
                .map(|(e, [re, im])| (e, Complex::new(re, im))),
        )
    }
}

impl From<Polynomial> for PolynomialJson {
    fn from(p: Polynomial) -> Self {
        PolynomialJson {
            m: p.num_vars,
            terms: p.terms.into_iter().map(|(e, c)| (e, [c.re, c.im])).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn constant_one_evaluates_to_one() {
        let p = Polynomial::constant(2, c(1.0));
        assert_eq!(p.eval(&[c(3.0), Complex::new(0.5, -2.0)]).unwrap(), c(1.0));
    }

    #[test]
    fn square_of_two() {
        let p = Polynomial::monomial(1, vec![2], c(1.0));
        assert_eq!(p.eval(&[c(2.0)]).unwrap(), c(4.0));
    }

    #[test]
    fn root_by_construction() {
        let p = Polynomial::univariate(&[c(2.0), c(-3.0), c(1.0)]);
        assert_eq!(p.eval(&[c(1.0)]).unwrap(), c(0.0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = Polynomial::variable(2, 0);
        assert!(matches!(
            p.eval(&[c(1.0)]),
            Err(AlgebraError::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn canonical_form_merges_and_drops_zeros() {
        let p = Polynomial::new(
            1,
            vec![
                (vec![1], c(2.0)),
                (vec![0], c(1.0)),
                (vec![1], c(-2.0)),
                (vec![3], c(0.0)),
            ],
        )
        .unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.degree(), 0);
        assert_eq!(Polynomial::zero(3).degree(), -1);
    }

    #[test]
    fn grlex_order_of_terms() {
        let p = Polynomial::new(
            2,
            vec![
                (vec![0, 2], c(1.0)),
                (vec![1, 0], c(1.0)),
                (vec![2, 0], c(1.0)),
                (vec![0, 0], c(1.0)),
                (vec![1, 1], c(1.0)),
            ],
        )
        .unwrap();
        let exps: Vec<_> = p.terms().iter().map(|(e, _)| e.clone()).collect();
        assert_eq!(
            exps,
            vec![vec![0, 0], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]]
        );
        assert_eq!(p.degree(), 2);
        assert_eq!(p.coefficient(&[1, 1]), c(1.0));
        assert_eq!(p.coefficient(&[3, 0]), c(0.0));
    }

    #[test]
    fn json_wire_format() {
        let p = Polynomial::new(1, vec![(vec![2], c(1.0)), (vec![0], Complex::new(0.0, -1.0))])
            .unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"m":1,"terms":[[[0],[0.0,-1.0]],[[2],[1.0,0.0]]]}"#);
        let back: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"m":2,"terms":[[[1],[1.0,0.0]]]}"#;
        assert!(serde_json::from_str::<Polynomial>(bad).is_err());
    }
}
