//! Exact rational helpers: parsing, formatting and serde adapters.
//!
//! Rationals travel as strings (`"p/q"` or `"n"`) so that no precision is lost
//! through JSON numbers.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"`, `"-p/q"` or an integer string. Decimal points are rejected.
pub fn parse(text: &str) -> Result<Rational> {
    let err = |message: &str| Error::Parse { location: format!("rational `{text}`"), message: message.to_string() };
    let text = text.trim();
    if text.is_empty() {
        return Err(err("empty string"));
    }
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err("numerator is not an integer"))?;
    let den: BigInt = den.parse().map_err(|_| err("denominator is not an integer"))?;
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Canonical string form: `"n"` for integers, `"p/q"` otherwise.
pub fn format(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or_else(|| if value.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Fixed-point decimal rendering with `digits` fractional digits (rounded half away from zero).
pub fn decimal(value: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (value * Rational::from_integer(scale.clone())).round().to_integer();
    let negative = scaled.is_negative();
    let abs = scaled.abs();
    let int_part = &abs / &scale;
    let frac_part = &abs % &scale;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    let _ = write!(out, "{int_part}");
    if digits > 0 {
        let _ = write!(out, ".{:0>width$}", frac_part.to_string(), width = digits);
    }
    out
}

/// H(n) = 1 + 1/2 + ... + 1/n.
pub fn harmonic(n: usize) -> Rational {
    (1..=n).fold(Rational::zero(), |acc, k| acc + ratio(1, k as i64))
}

/// `#[serde(with = "rational::serde_str")]`
pub mod serde_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "rational::serde_vec")]`
pub mod serde_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        values.iter().map(super::format).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts.iter().map(|t| super::parse(t).map_err(serde::de::Error::custom)).collect()
    }
}

/// `#[serde(with = "rational::serde_opt")]`
pub mod serde_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        value.as_ref().map(super::format).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?.map(|t| super::parse(&t).map_err(serde::de::Error::custom)).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse("1/6").unwrap(), ratio(1, 6));
        assert_eq!(parse("-4/6").unwrap(), ratio(-2, 3));
        assert_eq!(parse(" 7 ").unwrap(), int(7));
        assert!(parse("0.5").is_err());
        assert!(parse("1/0").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format(&ratio(10, 4)), "5/2");
        assert_eq!(format(&int(-3)), "-3");
        assert_eq!(decimal(&ratio(5, 3), 4), "1.6667");
        assert_eq!(decimal(&ratio(-1, 8), 2), "-0.13");
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(0), int(0));
        assert_eq!(harmonic(3), ratio(11, 6));
    }
}
