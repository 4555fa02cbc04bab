//! Exact rational arithmetic for scores, weights, and interval endpoints.
//!
//! Every quantity the library compares — beta weights, scores, breakpoints —
//! is an exact rational. Floating point never participates in a comparison;
//! it appears only as a convenience field in rendered reports.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use crate::Error;

/// Arbitrary-precision rational, compared and hashed exactly.
///
/// The canonical text form is `num/den` in lowest terms, or just `num` when
/// the denominator is 1: `"5/2"`, `"3"`, `"-1/6"`. That text form is also the
/// JSON serialization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `numer/denom`. Panics if `denom == 0`; use [`Rational::from_str`]
    /// for untrusted input.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn integer(value: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_usize(value: usize) -> Self {
        Rational(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Nearest `f64`, for report convenience fields only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Parses `"num"` or `"num/den"` with optional leading sign. Rejects
    /// floats, empty parts, and zero denominators.
    fn from_str(text: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidRational {
            text: text.to_string(),
        };
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(bad());
        }
        let (numer_text, denom_text) = match trimmed.split_once('/') {
            Some((n, d)) => (n, d),
            None => (trimmed, "1"),
        };
        let numer = BigInt::from_str(numer_text.trim()).map_err(|_| bad())?;
        let denom = BigInt::from_str(denom_text.trim()).map_err(|_| bad())?;
        if denom.is_zero() {
            return Err(bad());
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(|_| {
            de::Error::custom(format!("invalid rational '{text}' (expected num or num/den)"))
        })
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl $trait for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_lowest_terms() {
        assert_eq!(Rational::new(6, 4).to_string(), "3/2");
        assert_eq!(Rational::new(4, 2).to_string(), "2");
        assert_eq!(Rational::new(-3, 6).to_string(), "-1/2");
        assert_eq!(Rational::new(3, -6).to_string(), "-1/2");
        assert_eq!(Rational::zero().to_string(), "0");
    }

    #[test]
    fn parse_accepts_integers_and_fractions() {
        assert_eq!("5/2".parse::<Rational>().unwrap(), Rational::new(5, 2));
        assert_eq!("3".parse::<Rational>().unwrap(), Rational::integer(3));
        assert_eq!("-7/3".parse::<Rational>().unwrap(), Rational::new(-7, 3));
        assert_eq!("6/4".parse::<Rational>().unwrap(), Rational::new(3, 2));
    }

    #[test]
    fn parse_rejects_garbage() {
        for text in ["", "  ", "1.5", "one", "1/0", "2/", "/3", "1/2/3"] {
            assert!(text.parse::<Rational>().is_err(), "accepted {text:?}");
        }
    }

    #[test]
    fn exact_ordering() {
        // 1/3 < 0.3333333333333333 is false in f64 but the exact order holds.
        let third = Rational::new(1, 3);
        let approx = Rational::new(3333333333333333, 10000000000000000);
        assert!(approx < third);
        assert!(Rational::new(2, 4) == Rational::new(1, 2));
    }

    #[test]
    fn arithmetic() {
        let k = Rational::new(5, 2);
        let score = Rational::integer(6) + (k.clone() - Rational::one()) * Rational::integer(1);
        assert_eq!(score, Rational::new(15, 2));
        assert_eq!(Rational::integer(3) / Rational::integer(2), Rational::new(3, 2));
    }

    #[test]
    fn serde_round_trips_as_string() {
        let k: Rational = serde_json::from_str("\"5/2\"").unwrap();
        assert_eq!(k, Rational::new(5, 2));
        assert_eq!(serde_json::to_string(&k).unwrap(), "\"5/2\"");
        assert!(serde_json::from_str::<Rational>("\"1/0\"").is_err());
    }
}
