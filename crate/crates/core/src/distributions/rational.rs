//! Exact rationals backed by arbitrary-precision integers.
//!
//! [`Rational`] is `num_rational::BigRational`: always in lowest terms with a
//! positive denominator. The canonical text form is `"p/q"` (with an optional
//! leading `-`); integers are still written with an explicit `/1` so that the
//! form is uniform across files.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rational = BigRational;

/// `n / d` in lowest terms. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn uint(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d` for unsigned operands.
pub fn urat(n: u64, d: u64) -> Rational {
    assert!(d != 0, "zero denominator");
    let g = n.gcd(&d);
    Rational::new_raw(BigInt::from(n / g), BigInt::from(d / g))
}

pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `"p/q"`, `"-p/q"`, an integer `"p"`, or a finite decimal such as
/// `"0.125"`. The result is reduced to lowest terms.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("malformed rational `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = frac.len() as u32;
        if digits == 0 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole_part: BigInt = match whole.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(digits);
        let mut n = whole_part * &scale + frac_part;
        if negative {
            n = -n;
        }
        return Ok(Rational::new(n, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact conversion to `u64`, for rationals that are known to be integers.
pub fn to_u64_exact(x: &Rational) -> Result<u64> {
    if !x.is_integer() {
        return Err(Error::Parse(format!(
            "{} is not an integer",
            format_rational(x)
        )));
    }
    x.to_integer()
        .to_u64()
        .ok_or_else(|| Error::TooLarge(x.to_string()))
}

/// Serde adapter writing a [`Rational`] as its canonical `"p/q"` string.
pub mod serde_rational {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use super::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalizes() {
        assert_eq!(parse_rational("5/27").unwrap(), rat(5, 27));
        assert_eq!(parse_rational("10/54").unwrap(), rat(5, 27));
        assert_eq!(parse_rational("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "1/0", "a/b", "1/2/3", "1.", "x.5"] {
            assert!(parse_rational(s).is_err(), "{s}");
        }
    }

    #[test]
    fn canonical_form_round_trips() {
        for x in [rat(5, 27), rat(-1, 2), int(1), int(0), rat(123456789, 1000)] {
            let s = format_rational(&x);
            assert_eq!(parse_rational(&s).unwrap(), x);
        }
        assert_eq!(format_rational(&int(1)), "1/1");
        assert_eq!(format_rational(&rat(10, 54)), "5/27");
    }
}
