//! Exact rational arithmetic helpers.
//!
//! Costs, scores, error rates and bounds are all carried as [`Rational`]
//! so that argmin ties and bound checks are decided exactly.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{input}` as a rational number")]
pub struct ParseRationalError {
    pub input: String,
}

/// Parses `p`, `p/q` or a finite decimal such as `0.125` or `-3.5`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError { input: s.to_string() };
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = i128::from_str(p.trim()).map_err(|_| err())?;
        let q = i128::from_str(q.trim()).map_err(|_| err())?;
        if q == 0 {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if frac.is_empty() && int_digits.is_empty() {
            return Err(err());
        }
        if !int_digits.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        if frac.len() > 30 {
            return Err(err());
        }
        let scale = 10i128.checked_pow(frac.len() as u32).ok_or_else(err)?;
        let whole: i128 = if int_digits.is_empty() { 0 } else { int_digits.parse().map_err(|_| err())? };
        let part: i128 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| err())? };
        let numer = whole.checked_mul(scale).and_then(|w| w.checked_add(part)).ok_or_else(err)?;
        let numer = if negative { -numer } else { numer };
        return Ok(Rational::new(numer, scale));
    }
    i128::from_str(t).map(Rational::from_integer).map_err(|_| err())
}

/// Renders `p/q`, or just `p` when the denominator is one.
pub fn format_exact(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with six fractional digits, rounded half away from zero.
pub fn format_decimal(r: &Rational) -> String {
    let scaled = *r * Rational::from_integer(1_000_000);
    let rounded = scaled.round().to_integer();
    let sign = if rounded < 0 { "-" } else { "" };
    let abs = rounded.abs();
    format!("{sign}{}.{:06}", abs / 1_000_000, abs % 1_000_000)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

pub fn is_non_negative(r: &Rational) -> bool {
    !r.is_negative()
}

/// Display adapter printing a rational in exact `p/q` form.
pub struct Exact<'a>(pub &'a Rational);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_exact(self.0))
    }
}

pub fn zero() -> Rational {
    Rational::zero()
}

/// Serde adapter storing a rational as its exact `p/q` string.
pub mod serde_exact {
    use super::{format_exact, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_exact(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
