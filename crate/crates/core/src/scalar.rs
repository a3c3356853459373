//! Scalar backends.
//!
//! Every generic routine in the crate is written against [`Scalar`], which is
//! implemented for `f64` (tolerance-based zero tests) and for [`Rational`]
//! (exact arithmetic; all zero tests are exact and tolerances are ignored).

use std::fmt::{self, Debug};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalarKind {
    #[serde(rename = "f64")]
    F64,
    #[serde(rename = "rational")]
    Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "+")]
    Positive,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Negative => "-",
            Sign::Zero => "0",
            Sign::Positive => "+",
        })
    }
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const KIND: ScalarKind;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Pivot weight for elimination.
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    /// Zero test relative to `scale`, the magnitude of a value of the same
    /// homogeneous degree. Exact backends ignore both arguments.
    fn is_negligible(&self, scale: f64, eps: f64) -> bool;

    fn sign_rel(&self, scale: f64, eps: f64) -> Sign;

    /// Square root inside the scalar field, if it exists there.
    fn sqrt_exact(&self) -> Option<Self>;

    /// Rank of a matrix. Float: singular values above `tol * sigma_max * max(rows, cols)`.
    /// Exact: fraction-free elimination, `tol` ignored.
    fn matrix_rank(m: &Matrix<Self>, tol: f64) -> usize;

    /// Basis of the column space. Float: orthonormal left singular vectors.
    /// Exact: the pivot columns themselves.
    fn column_basis(m: &Matrix<Self>, tol: f64) -> Matrix<Self>;

    /// Float values encode as JSON numbers, rationals as `"p/q"` strings.
    fn to_json(&self) -> serde_json::Value;

    fn from_json(v: &serde_json::Value) -> Option<Self>;

    fn is_exact() -> bool {
        Self::KIND == ScalarKind::Rational
    }
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::F64;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, scale: f64, eps: f64) -> bool {
        self.abs() <= eps * scale
    }

    fn sign_rel(&self, scale: f64, eps: f64) -> Sign {
        if self.is_negligible(scale, eps) {
            Sign::Zero
        } else if *self > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    fn sqrt_exact(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }

    fn matrix_rank(m: &Matrix<Self>, tol: f64) -> usize {
        let sv = m.singular_values();
        let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
        if smax == 0.0 {
            return 0;
        }
        let thresh = tol * smax * m.rows().max(m.cols()) as f64;
        sv.iter().filter(|&&s| s > thresh).count()
    }

    fn column_basis(m: &Matrix<Self>, tol: f64) -> Matrix<Self> {
        m.column_space_basis(tol)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }

    fn from_json(v: &serde_json::Value) -> Option<Self> {
        match v {
            serde_json::Value::Number(n) => n.as_f64(),
            serde_json::Value::String(s) => s
                .trim()
                .parse::<f64>()
                .ok()
                .or_else(|| parse_rational(s).map(|r| Scalar::to_f64(&r))),
            _ => None,
        }
    }
}

impl Scalar for Rational {
    const KIND: ScalarKind = ScalarKind::Rational;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            // Any nonzero pivot is exact; prefer larger ones to keep numbers small.
            Scalar::to_f64(&self.abs()).max(f64::MIN_POSITIVE)
        }
    }

    fn is_negligible(&self, _scale: f64, _eps: f64) -> bool {
        self.is_zero()
    }

    fn sign_rel(&self, _scale: f64, _eps: f64) -> Sign {
        if self.is_zero() {
            Sign::Zero
        } else if self.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let (n, d) = (self.numer(), self.denom());
        let (rn, rd) = (n.sqrt(), d.sqrt());
        (&rn * &rn == *n && &rd * &rd == *d).then(|| Rational::new(rn, rd))
    }

    fn matrix_rank(m: &Matrix<Self>, _tol: f64) -> usize {
        crate::linalg::rank_fraction_free(m)
    }

    fn column_basis(m: &Matrix<Self>, _tol: f64) -> Matrix<Self> {
        m.pivot_column_basis()
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }

    fn from_json(v: &serde_json::Value) -> Option<Self> {
        match v {
            serde_json::Value::String(s) => parse_rational(s),
            serde_json::Value::Number(n) => parse_rational(&n.to_string()),
            _ => None,
        }
    }
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Parses `"p/q"`, `"p"`, or a decimal literal such as `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Ok(p) = s.parse::<BigInt>() {
        return Some(Rational::from_integer(p));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.')?;
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(digits, denom);
    Some(if neg { -r } else { r })
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        format!("{}/1", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}
