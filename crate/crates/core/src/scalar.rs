//! Dual numeric backend: exact big rationals and IEEE doubles.
//!
//! Every quantity in the library is a [`Scalar`]. Arithmetic between two
//! exact values stays exact; as soon as a float enters, the result is a
//! float. This lets the recurrence/fibonomial layer run bit-exactly on
//! rational inputs while the analytic layer (integrals, exponentials,
//! residuals) works in doubles.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, Serializer};

use crate::error::{Result, StError};

/// A number that is either an exact rational or an IEEE double.
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
        Scalar::Exact(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact ratio p/q. Panics if `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "ratio denominator must be nonzero");
        Scalar::Exact(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn from_f64(v: f64) -> Self {
        Scalar::Float(v)
    }

    /// Parse a numeric literal. `p/q` and plain integers are exact;
    /// anything with a decimal point or exponent becomes a float.
    pub fn parse(text: &str) -> Result<Self> {
        let s = text.trim();
        if s.is_empty() {
            return Err(StError::InvalidArgument("empty number literal".into()));
        }
        if let Some((num, den)) = s.split_once('/') {
            let n: BigInt = num
                .trim()
                .parse()
                .map_err(|_| StError::InvalidArgument(format!("bad numerator in `{s}`")))?;
            let d: BigInt = den
                .trim()
                .parse()
                .map_err(|_| StError::InvalidArgument(format!("bad denominator in `{s}`")))?;
            if d.is_zero() {
                return Err(StError::InvalidArgument(format!("zero denominator in `{s}`")));
            }
            return Ok(Scalar::Exact(BigRational::new(n, d)));
        }
        if s.contains('.') || s.contains('e') || s.contains('E') {
            let v: f64 = s
                .parse()
                .map_err(|_| StError::InvalidArgument(format!("bad float literal `{s}`")))?;
            return Ok(Scalar::Float(v));
        }
        let n: BigInt = s
            .parse()
            .map_err(|_| StError::InvalidArgument(format!("bad integer literal `{s}`")))?;
        Ok(Scalar::Exact(BigRational::from_integer(n)))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(v) => *v == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rational_to_f64(r),
            Scalar::Float(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(v) => Scalar::Float(v.abs()),
        }
    }

    /// Sign as an integer in {-1, 0, 1}; exact for rationals.
    pub fn signum_i(&self) -> i32 {
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

    /// Integer power with the 0^0 = 1 convention.
    pub fn powu(&self, e: u32) -> Scalar {
        match self {
            Scalar::Exact(r) => {
                let mut acc = BigRational::one();
                for _ in 0..e {
                    acc *= r;
                }
                Scalar::Exact(acc)
            }
            Scalar::Float(v) => Scalar::Float(v.powi(e as i32)),
        }
    }

    /// Square root: exact when the operand is a perfect rational square,
    /// a double otherwise. Negative operands yield a NaN float.
    pub fn sqrt(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => {
                if r.is_negative() {
                    return Scalar::Float(f64::NAN);
                }
                let (n, d) = (r.numer(), r.denom());
                let sn = n.sqrt();
                let sd = d.sqrt();
                if &sn * &sn == *n && &sd * &sd == *d {
                    Scalar::Exact(BigRational::new(sn, sd))
                } else {
                    Scalar::Float(rational_to_f64(r).sqrt())
                }
            }
            Scalar::Float(v) => Scalar::Float(v.sqrt()),
        }
    }

    pub fn recip(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(StError::DomainError("division by zero".into()));
        }
        Ok(match self {
            Scalar::Exact(r) => Scalar::Exact(r.recip()),
            Scalar::Float(v) => Scalar::Float(1.0 / v),
        })
    }

    /// Relative comparison with tolerance `rel`, used in float mode.
    /// Exact pairs compare exactly.
    pub fn approx_eq(&self, other: &Scalar, rel: f64) -> bool {
        if let (Scalar::Exact(a), Scalar::Exact(b)) = (self, other) {
            return a == b;
        }
        let (a, b) = (self.to_f64(), other.to_f64());
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
    }
}

/// Convert without round-tripping through i64 so huge rationals stay finite
/// as long as the quotient is representable.
fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    // Fall back to scaling by a power of two when one side overflows.
    let bits_n = r.numer().bits() as i64;
    let bits_d = r.denom().bits() as i64;
    let shift = (bits_n.max(bits_d) - 900).max(0) as u64;
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
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
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
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

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
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

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Float(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Scalar {
    /// Exact integers in the f64-safe range serialize as JSON numbers,
    /// other exact values as `"p/q"` strings, floats as numbers.
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(r) => {
                if r.is_integer() {
                    if let Some(i) = r.numer().to_i64() {
                        if i.abs() <= (1i64 << 53) {
                            return ser.serialize_i64(i);
                        }
                    }
                }
                ser.serialize_str(&r.to_string())
            }
            Scalar::Float(v) => {
                if v.is_finite() {
                    ser.serialize_f64(*v)
                } else {
                    ser.serialize_str(&v.to_string())
                }
            }
        }
    }
}
