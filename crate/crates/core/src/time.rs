//! Exact rational time.
//!
//! Every instant and duration in the simulator is a [`Time`], a thin wrapper
//! around an arbitrary-precision rational. Interval endpoints such as
//! `a + (1 + δ)·p` are compared exactly, so two runs over the same instance
//! always make the same admission decisions.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Dimensionless exact factor (slack ε, γ, β, ...).
pub type Rational = BigRational;

/// Builds a [`Rational`] from a small numerator/denominator pair.
///
/// Panics if `denom == 0`.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Renders a rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `"p/q"`, an integer, or an exact decimal such as `"0.3"`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let bad = || ParseRationalError::Malformed(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let numer = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let denom = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if denom.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(BigRational::new(numer, denom));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{whole_digits}{frac}");
        let mut numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
            .map_err(|_| bad())?;
        if negative {
            numer = -numer;
        }
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(numer, denom));
    }
    let numer = BigInt::from_str(s).map_err(|_| bad())?;
    Ok(BigRational::from_integer(numer))
}

/// An exact point in time or duration.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Time(BigRational);

impl Time {
    pub fn zero() -> Self {
        Time(BigRational::zero())
    }

    pub fn from_int(value: i64) -> Self {
        Time(BigRational::from_integer(BigInt::from(value)))
    }

    /// `numer / denom`. Panics if `denom == 0`.
    pub fn new(numer: i64, denom: i64) -> Self {
        Time(ratio(numer, denom))
    }

    pub fn from_rational(value: Rational) -> Self {
        Time(value)
    }

    pub fn as_rational(&self) -> &Rational {
        &self.0
    }

    pub fn into_rational(self) -> Rational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Lossy conversion for reporting only; never fed back into the simulation.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `self · factor`.
    pub fn scale(&self, factor: &Rational) -> Time {
        Time(&self.0 * factor)
    }

    /// `self / other` as a dimensionless ratio. Panics if `other` is zero.
    pub fn ratio_to(&self, other: &Time) -> Rational {
        &self.0 / &other.0
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl fmt::Debug for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Time({self})")
    }
}

impl FromStr for Time {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Time)
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for [`Rational`] fields, using the same `"p/q"` text form.
pub mod rational_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Time> for &Time {
            type Output = Time;
            fn $method(self, rhs: &Time) -> Time {
                Time($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Time> for Time {
            type Output = Time;
            fn $method(self, rhs: Time) -> Time {
                Time($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Time> for Time {
            type Output = Time;
            fn $method(self, rhs: &Time) -> Time {
                Time($trait::$method(self.0, &rhs.0))
            }
        }
        impl $trait<Time> for &Time {
            type Output = Time;
            fn $method(self, rhs: Time) -> Time {
                Time($trait::$method(&self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);

impl AddAssign<&Time> for Time {
    fn add_assign(&mut self, rhs: &Time) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Time> for Time {
    fn sub_assign(&mut self, rhs: &Time) {
        self.0 -= &rhs.0;
    }
}

impl Mul<&Rational> for &Time {
    type Output = Time;
    fn mul(self, rhs: &Rational) -> Time {
        Time(&self.0 * rhs)
    }
}

impl Mul<&Rational> for Time {
    type Output = Time;
    fn mul(self, rhs: &Rational) -> Time {
        Time(self.0 * rhs)
    }
}

impl<'a> Sum<&'a Time> for Time {
    fn sum<I: Iterator<Item = &'a Time>>(iter: I) -> Time {
        iter.fold(Time::zero(), |acc, t| acc + t)
    }
}

impl Sum<Time> for Time {
    fn sum<I: Iterator<Item = Time>>(iter: I) -> Time {
        iter.fold(Time::zero(), |acc, t| acc + t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!("3/2".parse::<Time>().unwrap(), Time::new(3, 2));
        assert_eq!("6/4".parse::<Time>().unwrap(), Time::new(3, 2));
        assert_eq!("7".parse::<Time>().unwrap(), Time::from_int(7));
        assert_eq!("0.3".parse::<Time>().unwrap(), Time::new(3, 10));
        assert_eq!("1.25".parse::<Time>().unwrap(), Time::new(5, 4));
        assert!("1/0".parse::<Time>().is_err());
        assert!("abc".parse::<Time>().is_err());
        assert!("".parse::<Time>().is_err());
        assert!("1.".parse::<Time>().is_err());
    }

    #[test]
    fn display_is_lowest_terms() {
        assert_eq!(Time::new(6, 4).to_string(), "3/2");
        assert_eq!(Time::new(4, 2).to_string(), "2");
        assert_eq!(Time::zero().to_string(), "0");
    }

    #[test]
    fn serde_uses_string_form() {
        let t = Time::new(3, 2);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, "\"3/2\"");
        let back: Time = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }

    fn arb_time() -> impl Strategy<Value = Time> {
        (-10_000i64..10_000, 1i64..10_000).prop_map(|(n, d)| Time::new(n, d))
    }

    proptest! {
        #[test]
        fn add_then_sub_is_identity(a in arb_time(), b in arb_time()) {
            prop_assert_eq!(&(&a + &b) - &b, a);
        }

        #[test]
        fn addition_is_associative_and_commutative(a in arb_time(), b in arb_time(), c in arb_time()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
        }

        #[test]
        fn text_round_trip(a in arb_time()) {
            prop_assert_eq!(a.to_string().parse::<Time>().unwrap(), a);
        }
    }
}
