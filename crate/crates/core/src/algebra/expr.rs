//! Closed-form coefficient functions on ℂ^m.
//!
//! Wire form is `{"op": "...", "args": [...]}`. Recognised ops:
//!
//! | op      | args                                  |
//! |---------|---------------------------------------|
//! | `const` | `[re]` or `[re, im]`                  |
//! | `coord` | `[i]` (zero-based coordinate index)   |
//! | `add`   | `[expr, ...]`                         |
//! | `mul`   | `[expr, ...]`                         |
//! | `sub`   | `[expr, expr]`                        |
//! | `neg`   | `[expr]`                              |
//! | `pow`   | `[expr, k]` with `k` a non-negative integer |
//! | `exp`, `sin`, `cos` | `[expr]`                  |
//! | `abs`   | `[expr]` (modulus; not holomorphic)   |
//! | `poly`  | `[polynomial]`                        |
//! | `recip` | `[polynomial]` or `[polynomial, guard]`: `1/p`, failing where `|p| < guard` |

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use super::{AlgebraError, Polynomial};
use crate::Complex;

/// Default modulus below which a reciprocal is treated as a pole hit.
pub const DEFAULT_POLE_GUARD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Complex),
    Coord(usize),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Abs(Box<Expr>),
    Poly(Polynomial),
    Recip { den: Polynomial, guard: f64 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("coordinate x{index} requested but point has dimension {dim}")]
    CoordOutOfRange { index: usize, dim: usize },
    #[error("pole hit: |denominator| = {modulus:e} below guard {guard:e}")]
    PoleHit { modulus: f64, guard: f64 },
    #[error("non-finite value")]
    NonFinite,
    #[error(transparent)]
    Algebra(#[from] Box<AlgebraError>),
}

impl Expr {
    pub fn constant(re: f64) -> Self {
        Expr::Const(Complex::new(re, 0.0))
    }

    pub fn coord(i: usize) -> Self {
        Expr::Coord(i)
    }

    pub fn exp(e: Expr) -> Self {
        Expr::Exp(Box::new(e))
    }

    pub fn neg(e: Expr) -> Self {
        Expr::Neg(Box::new(e))
    }

    pub fn eval(&self, x: &[Complex]) -> Result<Complex, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Coord(i) => *x.get(*i).ok_or(EvalError::CoordOutOfRange {
                index: *i,
                dim: x.len(),
            })?,
            Expr::Add(args) => {
                let mut s = Complex::new(0.0, 0.0);
                for a in args {
                    s += a.eval(x)?;
                }
                s
            }
            Expr::Mul(args) => {
                let mut p = Complex::new(1.0, 0.0);
                for a in args {
                    p *= a.eval(x)?;
                }
                p
            }
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Pow(a, k) => a.eval(x)?.powu(*k),
            Expr::Exp(a) => a.eval(x)?.exp(),
            Expr::Sin(a) => a.eval(x)?.sin(),
            Expr::Cos(a) => a.eval(x)?.cos(),
            Expr::Abs(a) => Complex::new(a.eval(x)?.norm(), 0.0),
            Expr::Poly(p) => p.eval(x).map_err(|e| EvalError::Algebra(Box::new(e)))?,
            Expr::Recip { den, guard } => {
                let d = den.eval(x).map_err(|e| EvalError::Algebra(Box::new(e)))?;
                if d.norm() < *guard {
                    return Err(EvalError::PoleHit {
                        modulus: d.norm(),
                        guard: *guard,
                    });
                }
                d.inv()
            }
        };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    pub fn to_json(&self) -> Value {
        let unary = |op: &str, a: &Expr| json!({"op": op, "args": [a.to_json()]});
        match self {
            Expr::Const(c) => json!({"op": "const", "args": [c.re, c.im]}),
            Expr::Coord(i) => json!({"op": "coord", "args": [i]}),
            Expr::Add(args) => {
                json!({"op": "add", "args": args.iter().map(Expr::to_json).collect::<Vec<_>>()})
            }
            Expr::Mul(args) => {
                json!({"op": "mul", "args": args.iter().map(Expr::to_json).collect::<Vec<_>>()})
            }
            Expr::Sub(a, b) => json!({"op": "sub", "args": [a.to_json(), b.to_json()]}),
            Expr::Neg(a) => unary("neg", a),
            Expr::Pow(a, k) => json!({"op": "pow", "args": [a.to_json(), k]}),
            Expr::Exp(a) => unary("exp", a),
            Expr::Sin(a) => unary("sin", a),
            Expr::Cos(a) => unary("cos", a),
            Expr::Abs(a) => unary("abs", a),
            Expr::Poly(p) => json!({"op": "poly", "args": [p]}),
            Expr::Recip { den, guard } => json!({"op": "recip", "args": [den, guard]}),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self, AlgebraError> {
        let bad = |msg: String| AlgebraError::ExprSyntax(msg);
        let obj = v
            .as_object()
            .ok_or_else(|| bad(format!("expected object, found {v}")))?;
        if let Some(k) = obj.keys().find(|k| *k != "op" && *k != "args") {
            return Err(bad(format!("unknown field `{k}`")));
        }
        let op = obj
            .get("op")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("missing string field `op`".into()))?;
        let args: &[Value] = match obj.get("args") {
            Some(Value::Array(a)) => a,
            Some(other) => return Err(bad(format!("`args` must be an array, found {other}"))),
            None => &[],
        };
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(bad(format!("op `{op}` takes {n} args, found {}", args.len())))
            }
        };
        let num = |v: &Value| {
            v.as_f64()
                .ok_or_else(|| bad(format!("op `{op}`: expected number, found {v}")))
        };
        let sub = |i: usize| Self::from_json(&args[i]).map(Box::new);
        let poly = |v: &Value| {
            serde_json::from_value::<Polynomial>(v.clone())
                .map_err(|e| bad(format!("op `{op}`: bad polynomial: {e}")))
        };
        Ok(match op {
            "const" => match args.len() {
                1 => Expr::Const(Complex::new(num(&args[0])?, 0.0)),
                2 => Expr::Const(Complex::new(num(&args[0])?, num(&args[1])?)),
                n => return Err(bad(format!("op `const` takes 1 or 2 args, found {n}"))),
            },
            "coord" => {
                arity(1)?;
                let i = args[0]
                    .as_u64()
                    .ok_or_else(|| bad("op `coord`: index must be a non-negative integer".into()))?;
                Expr::Coord(i as usize)
            }
            "add" | "mul" => {
                let parsed = args.iter().map(Self::from_json).collect::<Result<Vec<_>, _>>()?;
                if op == "add" {
                    Expr::Add(parsed)
                } else {
                    Expr::Mul(parsed)
                }
            }
            "sub" => {
                arity(2)?;
                Expr::Sub(sub(0)?, sub(1)?)
            }
            "pow" => {
                arity(2)?;
                let k = args[1]
                    .as_u64()
                    .ok_or_else(|| bad("op `pow`: exponent must be a non-negative integer".into()))?;
                Expr::Pow(sub(0)?, k as u32)
            }
            "neg" | "exp" | "sin" | "cos" | "abs" => {
                arity(1)?;
                let a = sub(0)?;
                match op {
                    "neg" => Expr::Neg(a),
                    "exp" => Expr::Exp(a),
                    "sin" => Expr::Sin(a),
                    "cos" => Expr::Cos(a),
                    _ => Expr::Abs(a),
                }
            }
            "poly" => {
                arity(1)?;
                Expr::Poly(poly(&args[0])?)
            }
            "recip" => {
                let guard = match args.len() {
                    1 => DEFAULT_POLE_GUARD,
                    2 => num(&args[1])?,
                    n => return Err(bad(format!("op `recip` takes 1 or 2 args, found {n}"))),
                };
                Expr::Recip {
                    den: poly(&args[0])?,
                    guard,
                }
            }
            other => return Err(bad(format!("unknown op `{other}`"))),
        })
    }
}

impl From<Polynomial> for Expr {
    fn from(p: Polynomial) -> Self {
        Expr::Poly(p)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Expr::from_json(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_coordinate() {
        let e = Expr::exp(Expr::coord(0));
        let v = e.eval(&[Complex::new(0.0, 0.0)]).unwrap();
        assert_eq!(v, Complex::new(1.0, 0.0));
    }

    #[test]
    fn pole_hit_is_an_error() {
        let den = Polynomial::variable(1, 0);
        let e = Expr::Recip {
            den,
            guard: DEFAULT_POLE_GUARD,
        };
        assert!(matches!(
            e.eval(&[Complex::new(0.0, 0.0)]),
            Err(EvalError::PoleHit { .. })
        ));
        assert_eq!(
            e.eval(&[Complex::new(2.0, 0.0)]).unwrap(),
            Complex::new(0.5, 0.0)
        );
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"op":"add","args":[
            {"op":"mul","args":[{"op":"const","args":[2.0]},{"op":"sin","args":[{"op":"coord","args":[1]}]}]},
            {"op":"pow","args":[{"op":"coord","args":[0]},3]},
            {"op":"recip","args":[{"m":2,"terms":[[[0,0],[4.0,0.0]],[[1,0],[1.0,0.0]]]}]},
            {"op":"neg","args":[{"op":"abs","args":[{"op":"coord","args":[0]}]}]}
        ]}"#;
        let e: Expr = serde_json::from_str(text).unwrap();
        let back: Expr = serde_json::from_value(serde_json::to_value(&e).unwrap()).unwrap();
        assert_eq!(back, e);
        let x = [Complex::new(0.5, 0.0), Complex::new(1.0, 0.0)];
        let want = 2.0 * 1f64.sin() + 0.125 + 1.0 / 4.5 - 0.5;
        assert!((e.eval(&x).unwrap() - Complex::new(want, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn syntax_errors_are_descriptive() {
        for (text, needle) in [
            (r#"{"op":"tan","args":[]}"#, "unknown op"),
            (r#"{"op":"exp","args":[]}"#, "takes 1 args"),
            (r#"{"op":"coord","args":[-1]}"#, "non-negative"),
            (r#"{"op":"exp","args":[{"op":"coord","args":[0]}],"x":1}"#, "unknown field"),
        ] {
            let err = serde_json::from_str::<Expr>(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{err}");
        }
    }
}
