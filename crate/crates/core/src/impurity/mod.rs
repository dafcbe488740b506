//! Admissible impurity functions over class-count vectors.
//!
//! Every function here is integer valued. The hinged families with a
//! fractional threshold `α = p/d` are evaluated on counts scaled by `d`, so
//! their values are expressed in units of `1/d²`; [`Impurity::units`] reports
//! that factor.
//!
//! Two hinged forms are provided. [`ImpurityFn::HingedPairs`] is the product
//! of hinges `[n_i−α]₊[n_j−α]₊`; [`ImpurityFn::HingedPairsOffset`] further
//! subtracts `α²` inside an outer hinge. Both vanish exactly when no two
//! classes exceed what the threshold tolerates, and both are admissible.

mod admissibility;
mod polynomial;

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::instance::ClassCounts;
use crate::rational::{format_exact, parse_rational, Rational};

pub use admissibility::{
    check_admissibility, check_admissibility_with, AdmissibilityOptions, AdmissibilityReport, Property, Violation,
};
pub use polynomial::{PolyTerm, PolynomialSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImpurityError {
    #[error("impurity value overflows 128-bit integers")]
    Overflow,
    #[error("powers exponent must be at least 2, got {0}")]
    InvalidPower(u32),
    #[error("hinge threshold must be non-negative, got {0}")]
    NegativeAlpha(String),
    #[error("polynomial term `{0}` has fewer than two distinct class variables")]
    SingletonTerm(String),
    #[error("cannot parse impurity `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

/// A set function evaluated through the class counts of the set.
pub trait Impurity: Send + Sync {
    fn evaluate(&self, counts: &ClassCounts) -> Result<u128, ImpurityError>;

    /// Integer units per unit of impurity; values are `units` times the
    /// real-valued function.
    fn units(&self) -> u128 {
        1
    }

    /// Polynomial degree used by the growth check `F(S) ≤ n^degree`.
    fn degree(&self) -> u32;

    fn name(&self) -> String;
}

impl<T: Impurity + ?Sized> Impurity for &T {
    fn evaluate(&self, counts: &ClassCounts) -> Result<u128, ImpurityError> {
        (**self).evaluate(counts)
    }
    fn units(&self) -> u128 {
        (**self).units()
    }
    fn degree(&self) -> u32 {
        (**self).degree()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImpurityFn {
    Pairs,
    Powers(u32),
    HingedPairs(Rational),
    HingedPairsOffset(Rational),
    Polynomial(PolynomialSpec),
}

impl ImpurityFn {
    pub fn powers(l: u32) -> Result<Self, ImpurityError> {
        if l < 2 {
            return Err(ImpurityError::InvalidPower(l));
        }
        Ok(ImpurityFn::Powers(l))
    }

    pub fn hinged(alpha: Rational) -> Result<Self, ImpurityError> {
        check_alpha(&alpha)?;
        Ok(ImpurityFn::HingedPairs(alpha))
    }

    pub fn hinged_offset(alpha: Rational) -> Result<Self, ImpurityError> {
        check_alpha(&alpha)?;
        Ok(ImpurityFn::HingedPairsOffset(alpha))
    }

    /// Hinge threshold of either hinged form.
    pub fn alpha(&self) -> Option<Rational> {
        match self {
            ImpurityFn::HingedPairs(a) | ImpurityFn::HingedPairsOffset(a) => Some(*a),
            _ => None,
        }
    }

    /// Same family with a different hinge threshold; other kinds are returned
    /// unchanged.
    pub fn with_alpha(&self, alpha: Rational) -> Result<Self, ImpurityError> {
        match self {
            ImpurityFn::HingedPairs(_) => ImpurityFn::hinged(alpha),
            ImpurityFn::HingedPairsOffset(_) => ImpurityFn::hinged_offset(alpha),
            other => Ok(other.clone()),
        }
    }

    /// Parses the CLI form but accepts polynomials with singleton terms, so
    /// that the admissibility checker can be pointed at them.
    pub fn parse_unchecked(s: &str) -> Result<Self, ImpurityError> {
        Self::parse_impl(s, false)
    }

    fn parse_impl(s: &str, strict: bool) -> Result<Self, ImpurityError> {
        let t = s.trim();
        let err = |reason: &str| ImpurityError::Parse { input: s.to_string(), reason: reason.to_string() };
        let (head, arg) = match t.split_once(':') {
            Some((h, a)) => (h.trim().to_ascii_lowercase(), Some(a.trim())),
            None => (t.to_ascii_lowercase(), None),
        };
        match (head.as_str(), arg) {
            ("pairs", None) => Ok(ImpurityFn::Pairs),
            ("powers", Some(l)) => ImpurityFn::powers(l.parse().map_err(|_| err("exponent must be an integer"))?),
            ("hinged", Some(a)) => ImpurityFn::hinged(parse_rational(a).map_err(|_| err("alpha must be rational"))?),
            ("hinged-offset", Some(a)) => {
                ImpurityFn::hinged_offset(parse_rational(a).map_err(|_| err("alpha must be rational"))?)
            }
            ("poly", Some(expr)) => {
                let expr = expr.trim_matches('"');
                let spec = if strict { PolynomialSpec::parse(expr)? } else { PolynomialSpec::parse_unchecked(expr)? };
                Ok(ImpurityFn::Polynomial(spec))
            }
            _ => Err(err("expected pairs, powers:L, hinged:ALPHA, hinged-offset:ALPHA or poly:EXPR")),
        }
    }
}

impl FromStr for ImpurityFn {
    type Err = ImpurityError;

    /// `pairs`, `powers:L`, `hinged:ALPHA`, `hinged-offset:ALPHA` or `poly:EXPR`.
    fn from_str(s: &str) -> Result<Self, ImpurityError> {
        Self::parse_impl(s, true)
    }
}

impl fmt::Display for ImpurityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImpurityFn::Pairs => write!(f, "pairs"),
            ImpurityFn::Powers(l) => write!(f, "powers:{l}"),
            ImpurityFn::HingedPairs(a) => write!(f, "hinged:{}", format_exact(a)),
            ImpurityFn::HingedPairsOffset(a) => write!(f, "hinged-offset:{}", format_exact(a)),
            ImpurityFn::Polynomial(p) => write!(f, "poly:{p}"),
        }
    }
}

impl Impurity for ImpurityFn {
    fn evaluate(&self, counts: &ClassCounts) -> Result<u128, ImpurityError> {
        match self {
            ImpurityFn::Pairs => pairs(counts),
            ImpurityFn::Powers(l) => powers(*l, counts),
            ImpurityFn::HingedPairs(a) => hinged_pairs(a, counts),
            ImpurityFn::HingedPairsOffset(a) => hinged_pairs_offset(a, counts),
            ImpurityFn::Polynomial(p) => polynomial(p, counts),
        }
    }

    fn units(&self) -> u128 {
        match self {
            ImpurityFn::HingedPairs(a) | ImpurityFn::HingedPairsOffset(a) => {
                let d = *a.denom() as u128;
                d * d
            }
            _ => 1,
        }
    }

    fn degree(&self) -> u32 {
        match self {
            ImpurityFn::Pairs | ImpurityFn::HingedPairs(_) | ImpurityFn::HingedPairsOffset(_) => 2,
            ImpurityFn::Powers(l) => *l,
            ImpurityFn::Polynomial(p) => p.degree(),
        }
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

/// Number of cross-class object pairs, `Σ_{i<j} n_i n_j`.
pub fn pairs(counts: &ClassCounts) -> Result<u128, ImpurityError> {
    let mut seen: u128 = 0;
    let mut acc: u128 = 0;
    for &c in &counts.counts {
        let c = c as u128;
        acc = c.checked_mul(seen).and_then(|p| acc.checked_add(p)).ok_or(ImpurityError::Overflow)?;
        seen = seen.checked_add(c).ok_or(ImpurityError::Overflow)?;
    }
    Ok(acc)
}

/// `(Σ n_i)^l − Σ n_i^l` for `l ≥ 2`.
pub fn powers(l: u32, counts: &ClassCounts) -> Result<u128, ImpurityError> {
    if l < 2 {
        return Err(ImpurityError::InvalidPower(l));
    }
    let total = counts.counts.iter().map(|&c| c as u128).sum::<u128>();
    let whole = total.checked_pow(l).ok_or(ImpurityError::Overflow)?;
    let mut parts: u128 = 0;
    for &c in &counts.counts {
        let p = (c as u128).checked_pow(l).ok_or(ImpurityError::Overflow)?;
        parts = parts.checked_add(p).ok_or(ImpurityError::Overflow)?;
    }
    Ok(whole - parts)
}

fn check_alpha(alpha: &Rational) -> Result<(), ImpurityError> {
    if alpha.is_negative() {
        return Err(ImpurityError::NegativeAlpha(format_exact(alpha)));
    }
    Ok(())
}

/// `([n_i·d − p]₊)` for every class, where `α = p/d`.
fn hinge_excess(alpha: &Rational, counts: &ClassCounts) -> Result<(Vec<u128>, u128), ImpurityError> {
    check_alpha(alpha)?;
    let d = *alpha.denom() as u128;
    let p = *alpha.numer() as u128;
    let excess = counts
        .counts
        .iter()
        .map(|&c| (c as u128).checked_mul(d).map(|m| m.saturating_sub(p)).ok_or(ImpurityError::Overflow))
        .collect::<Result<_, _>>()?;
    Ok((excess, p))
}

fn sum_over_pairs(excess: &[u128], offset: u128) -> Result<u128, ImpurityError> {
    let mut acc: u128 = 0;
    for i in 0..excess.len() {
        if excess[i].is_zero() {
            continue;
        }
        for &e in &excess[i + 1..] {
            let prod = excess[i].checked_mul(e).ok_or(ImpurityError::Overflow)?;
            acc = acc.checked_add(prod.saturating_sub(offset)).ok_or(ImpurityError::Overflow)?;
        }
    }
    Ok(acc)
}

/// Hinged-Pairs `Σ_{i<j} [n_i−α]₊ [n_j−α]₊`, one term per unordered class
/// pair. For `α = p/d` the result is in units of `1/d²`.
pub fn hinged_pairs(alpha: &Rational, counts: &ClassCounts) -> Result<u128, ImpurityError> {
    let (excess, _) = hinge_excess(alpha, counts)?;
    sum_over_pairs(&excess, 0)
}

/// Offset hinged-Pairs `Σ_{i<j} [[n_i−α]₊ [n_j−α]₊ − α²]₊`, in the same units
/// as [`hinged_pairs`].
pub fn hinged_pairs_offset(alpha: &Rational, counts: &ClassCounts) -> Result<u128, ImpurityError> {
    let (excess, p) = hinge_excess(alpha, counts)?;
    sum_over_pairs(&excess, p.checked_mul(p).ok_or(ImpurityError::Overflow)?)
}

/// Evaluates a non-negative polynomial in the class counts.
pub fn polynomial(spec: &PolynomialSpec, counts: &ClassCounts) -> Result<u128, ImpurityError> {
    spec.evaluate(&counts.counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(v: &[u64]) -> ClassCounts {
        ClassCounts::from_slice(v)
    }

    #[test]
    fn pairs_worked_values() {
        assert_eq!(pairs(&cc(&[30, 30])).unwrap(), 900);
        assert_eq!(pairs(&cc(&[30, 10])).unwrap(), 300);
        assert_eq!(pairs(&cc(&[15, 15])).unwrap(), 225);
        assert_eq!(pairs(&cc(&[0, 20])).unwrap(), 0);
        assert_eq!(pairs(&cc(&[7, 0, 0])).unwrap(), 0);
        assert_eq!(pairs(&cc(&[1, 2, 3])).unwrap(), 2 + 3 + 6);
    }

    #[test]
    fn powers_values() {
        assert_eq!(powers(2, &cc(&[30, 30])).unwrap(), 1800);
        assert_eq!(powers(3, &cc(&[1, 1])).unwrap(), 6);
        assert_eq!(powers(5, &cc(&[0, 9, 0])).unwrap(), 0);
        assert_eq!(powers(1, &cc(&[1, 1])), Err(ImpurityError::InvalidPower(1)));
        assert!(ImpurityFn::powers(0).is_err());
    }

    #[test]
    fn powers_five_fits_at_ten_thousand_objects() {
        let v = powers(5, &cc(&[2500, 2500, 2500, 2500])).unwrap();
        assert_eq!(v, 10_000u128.pow(5) - 4 * 2500u128.pow(5));
        assert_eq!(powers(40, &cc(&[10_000, 1])), Err(ImpurityError::Overflow));
    }

    #[test]
    fn hinged_worked_values() {
        let a = Rational::from_integer(8);
        assert_eq!(hinged_pairs(&a, &cc(&[30, 30])).unwrap(), 484);
        assert_eq!(hinged_pairs(&a, &cc(&[30, 10])).unwrap(), 44);
        assert_eq!(hinged_pairs(&a, &cc(&[0, 20])).unwrap(), 0);
        assert_eq!(hinged_pairs(&a, &cc(&[15, 15])).unwrap(), 49);
    }

    #[test]
    fn offset_hinge_subtracts_alpha_squared() {
        let a = Rational::from_integer(8);
        assert_eq!(hinged_pairs_offset(&a, &cc(&[30, 30])).unwrap(), 484 - 64);
        assert_eq!(hinged_pairs_offset(&a, &cc(&[30, 10])).unwrap(), 0);
        assert_eq!(hinged_pairs_offset(&a, &cc(&[15, 15])).unwrap(), 0);
        // n_i n_j ≤ α(n_i + n_j) is exactly the zero set of one offset term.
        for x in 0..40u64 {
            for y in 0..40u64 {
                let zero = hinged_pairs_offset(&a, &cc(&[x, y])).unwrap() == 0;
                let inside = x <= 8 || y <= 8 || x * y <= 8 * (x + y);
                assert_eq!(zero, inside, "({x},{y})");
            }
        }
    }

    #[test]
    fn hinged_at_zero_is_pairs() {
        let z = Rational::from_integer(0);
        for v in [[3u64, 4, 5], [0, 9, 2], [1, 1, 1]] {
            assert_eq!(hinged_pairs(&z, &cc(&v)).unwrap(), pairs(&cc(&v)).unwrap());
            assert_eq!(hinged_pairs_offset(&z, &cc(&v)).unwrap(), pairs(&cc(&v)).unwrap());
        }
    }

    #[test]
    fn fractional_alpha_uses_scaled_units() {
        // α = 1/2 on (3, 2): (2.5)(1.5) = 3.75 = 15 quarter units, and
        // 3.75 − 0.25 = 3.5 = 14 quarter units with the offset.
        let f = ImpurityFn::hinged(Rational::new(1, 2)).unwrap();
        assert_eq!(f.units(), 4);
        assert_eq!(f.evaluate(&cc(&[3, 2])).unwrap(), 15);
        let g = ImpurityFn::hinged_offset(Rational::new(1, 2)).unwrap();
        assert_eq!(g.evaluate(&cc(&[3, 2])).unwrap(), 14);
        assert!(ImpurityFn::hinged(Rational::new(-1, 2)).is_err());
    }

    #[test]
    fn parses_cli_forms() {
        assert_eq!("pairs".parse::<ImpurityFn>().unwrap(), ImpurityFn::Pairs);
        assert_eq!("powers:3".parse::<ImpurityFn>().unwrap(), ImpurityFn::Powers(3));
        assert_eq!(
            "hinged:5/2".parse::<ImpurityFn>().unwrap(),
            ImpurityFn::HingedPairs(Rational::new(5, 2))
        );
        assert!("poly:x1*x2".parse::<ImpurityFn>().is_ok());
        assert!(matches!("poly:x1".parse::<ImpurityFn>(), Err(ImpurityError::SingletonTerm(_))));
        assert!(ImpurityFn::parse_unchecked("poly:x1").is_ok());
        assert!("gini".parse::<ImpurityFn>().is_err());
        assert!("powers:1".parse::<ImpurityFn>().is_err());
        for s in ["pairs", "powers:4", "hinged:8", "hinged:1/3", "hinged-offset:2", "poly:2*x1^2*x2 + x1*x3"] {
            let f: ImpurityFn = s.parse().unwrap();
            assert_eq!(f.to_string().parse::<ImpurityFn>().unwrap(), f);
        }
    }
}
