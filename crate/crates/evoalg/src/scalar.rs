//! Dual-mode scalars: exact rationals for decision boundaries, f64 for
//! transcendental family entries.
//!
//! Zero tests in floating mode are relative to the scale of the enclosing
//! matrix: `|x| <= rel * max(1, scale)`. Exact scalars compare exactly.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Relative tolerance policy for floating-mode comparisons.
#[derive(Clone, Copy, Debug)]
pub struct Tol {
    pub rel: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { rel: 1e-9 }
    }
}

impl Tol {
    pub fn new(rel: f64) -> Self {
        Tol { rel }
    }

    /// Zero test for a matrix entry, relative to the matrix scale.
    pub fn entry_zero(&self, x: &Scalar, scale: f64) -> bool {
        match x {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(v) => v.abs() <= self.rel * scale.max(1.0),
        }
    }

    /// Zero test for a quantity quadratic in the matrix entries (determinants,
    /// `p^2 + q^2 k` and friends).
    pub fn quad_zero(&self, x: &Scalar, scale: f64) -> bool {
        match x {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(v) => {
                let s = scale.max(1.0);
                v.abs() <= self.rel * s * s
            }
        }
    }

    /// Approximate equality of two scalars, relative to their magnitude.
    pub fn scalar_eq(&self, a: &Scalar, b: &Scalar) -> bool {
        match (a, b) {
            (Scalar::Exact(x), Scalar::Exact(y)) => x == y,
            _ => {
                let (x, y) = (a.to_f64(), b.to_f64());
                (x - y).abs() <= self.rel * x.abs().max(y.abs()).max(1.0)
            }
        }
    }
}

/// A real scalar, either an exact rational or an f64.
///
/// Mixed-mode arithmetic demotes to floating point. Roots of exact values
/// stay exact only when the radicand is a perfect power.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Scalar::Exact(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn from_f64(v: f64) -> Self {
        Scalar::Float(v)
    }

    /// Parses a scalar literal. `p/q` and plain integers are exact; anything
    /// with a decimal point or exponent is floating.
    pub fn parse(text: &str) -> Result<Self, String> {
        let t = text.trim();
        if t.is_empty() {
            return Err("empty scalar literal".to_string());
        }
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in `{t}`"))?;
            let q: BigInt = q
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in `{t}`"))?;
            if q.is_zero() {
                return Err(format!("zero denominator in `{t}`"));
            }
            return Ok(Scalar::Exact(BigRational::new(p, q)));
        }
        if let Ok(n) = t.parse::<BigInt>() {
            return Ok(Scalar::Exact(BigRational::from_integer(n)));
        }
        t.parse::<f64>()
            .map(Scalar::Float)
            .map_err(|_| format!("cannot parse scalar `{t}`"))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// True zero, independent of any tolerance.
    pub fn is_exactly_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(v) => *v == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(v) => *v,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(v) => Scalar::Float(v.abs()),
        }
    }

    /// Sign of the scalar: -1, 0 or 1.
    pub fn sign(&self) -> i32 {
        match self {
            Scalar::Exact(r) => {
                if r.is_zero() {
                    0
                } else if r.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Scalar::Float(v) => {
                if *v == 0.0 {
                    0
                } else if *v > 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn recip(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.recip()),
            Scalar::Float(v) => Scalar::Float(1.0 / v),
        }
    }

    pub fn lt(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a < b,
            _ => self.to_f64() < other.to_f64(),
        }
    }

    /// Square root; stays exact for perfect-square rationals, otherwise
    /// demotes to floating point. Caller must ensure the value is nonnegative.
    pub fn sqrt(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => {
                debug_assert!(!r.is_negative(), "sqrt of negative scalar");
                match exact_root(r, 2) {
                    Some(root) => Scalar::Exact(root),
                    None => Scalar::Float(self.to_f64().sqrt()),
                }
            }
            Scalar::Float(v) => Scalar::Float(v.sqrt()),
        }
    }

    /// Real (sign-preserving) cube root; exact for perfect cubes.
    pub fn cbrt(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => match exact_root(r, 3) {
                Some(root) => Scalar::Exact(root),
                None => Scalar::Float(self.to_f64().cbrt()),
            },
            Scalar::Float(v) => Scalar::Float(v.cbrt()),
        }
    }
}

/// Exact n-th root of a rational, if both numerator and denominator are
/// perfect n-th powers. Negative inputs are allowed for odd n.
fn exact_root(r: &BigRational, n: u32) -> Option<BigRational> {
    let negative = r.is_negative();
    if negative && n % 2 == 0 {
        return None;
    }
    let num = r.numer().abs();
    let den = r.denom().clone();
    let num_root = num.nth_root(n);
    let den_root = den.nth_root(n);
    if num_root.pow(n) == num && den_root.pow(n) == den {
        let mut root = BigRational::new(num_root, den_root);
        if negative {
            root = -root;
        }
        Some(root)
    } else {
        None
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    _ => Scalar::Float(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);
scalar_binop!(Div, div, /);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(v) => Scalar::Float(-v),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{}", r),
            Scalar::Float(v) => write!(f, "{}", v),
        }
    }
}
