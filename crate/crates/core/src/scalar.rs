//! Number types the library is generic over.
//!
//! Every algorithm runs either on binary64 (`f64`) with tolerances or on
//! arbitrary-precision rationals ([`Rational`]) where all comparisons are
//! exact and every tolerance collapses to zero.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact rational number used in exact mode.
pub type Rational = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    /// True when arithmetic is exact and tolerances must be zero.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Converts a binary64 value. Exact for rationals (dyadic expansion).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn from_rational(r: &Rational) -> Self;
    fn abs(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Parses a decimal (`-1.25`, `3e-2`) or a ratio (`-7/3`).
    fn parse_str(s: &str) -> Option<Self>;
    /// JSON rendering: numbers for floats, `"p/q"` strings for rationals.
    fn to_json(&self) -> serde_json::Value;

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }

    /// Turns a float tolerance into one for this number type (zero if exact).
    fn tol(t: f64) -> Self {
        if Self::EXACT {
            Self::zero()
        } else {
            Self::from_f64(t)
        }
    }

    fn pow_u32(&self, p: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..p {
            acc = acc * self;
        }
        acc
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn parse_str(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: f64 = n.trim().parse().ok()?;
                let d: f64 = d.trim().parse().ok()?;
                if d == 0.0 {
                    None
                } else {
                    Some(n / d)
                }
            }
            None => s.parse::<f64>().ok().filter(|v| v.is_finite()),
        }
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(v: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(v).expect("finite value")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn parse_str(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = parse_decimal(n.trim())?;
            let d = parse_decimal(d.trim())?;
            if Zero::is_zero(&d) {
                return None;
            }
            return Some(n / d);
        }
        parse_decimal(s)
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }
}

/// `p/q` or `p` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact decimal parsing: `-12.5e-3` becomes `-125/10000`.
fn parse_decimal(s: &str) -> Option<Rational> {
    if s.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(if all_digits.is_empty() { "0" } else { &all_digits }).ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Shorthand for building rationals in tests and examples.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

/// `a <= b` up to an absolute tolerance.
pub fn le_tol<T: Scalar>(a: &T, b: &T, tol: &T) -> bool {
    a.clone() <= b.clone() + tol
}

/// `|a - b| <= tol`.
pub fn eq_tol<T: Scalar>(a: &T, b: &T, tol: &T) -> bool {
    (a.clone() - b).abs() <= *tol
}

/// Tolerance scaled by the magnitude of the compared quantities.
pub fn scaled_tol<T: Scalar>(tol: &T, magnitudes: &[&T]) -> T {
    if T::EXACT {
        return T::zero();
    }
    let mut scale = T::one();
    for m in magnitudes {
        let a = m.abs();
        if a > scale {
            scale = a;
        }
    }
    tol.clone() * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(Rational::parse_str("0.5"), Some(q(1, 2)));
        assert_eq!(Rational::parse_str("-1.25e1"), Some(q(-25, 2)));
        assert_eq!(Rational::parse_str("3/-6"), Some(q(-1, 2)));
        assert_eq!(Rational::parse_str("1e-3"), Some(q(1, 1000)));
        assert_eq!(Rational::parse_str("abc"), None);
        assert_eq!(Rational::parse_str("1/0"), None);
    }

    #[test]
    fn float_parses_ratios() {
        assert_eq!(f64::parse_str("1/4"), Some(0.25));
        assert_eq!(f64::parse_str(" 2 "), Some(2.0));
        assert_eq!(f64::parse_str("nan"), None);
    }

    #[test]
    fn rational_json_is_a_string() {
        assert_eq!(q(-2, 6).to_json(), serde_json::json!("-1/3"));
        assert_eq!(q(4, 2).to_json(), serde_json::json!("2"));
    }

    #[test]
    fn from_f64_is_exact() {
        assert_eq!(<Rational as Scalar>::from_f64(0.375), q(3, 8));
        assert_eq!(Scalar::to_f64(&<Rational as Scalar>::from_f64(0.1)), 0.1);
    }
}
