use std::fmt;

use super::ImpurityError;

/// One monomial `γ · x1^p1 · … · xk^pk`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyTerm {
    pub coefficient: u64,
    /// Exponent of class `i` at position `i`; missing trailing entries are 0.
    pub exponents: Vec<u32>,
}

impl PolyTerm {
    pub fn new(coefficient: u64, exponents: Vec<u32>) -> Self {
        PolyTerm { coefficient, exponents }
    }

    fn variables(&self) -> usize {
        self.exponents.iter().filter(|&&p| p > 0).count()
    }

    fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

impl fmt::Display for PolyTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut factors: Vec<String> = Vec::new();
        if self.coefficient != 1 || self.variables() == 0 {
            factors.push(self.coefficient.to_string());
        }
        for (i, &p) in self.exponents.iter().enumerate() {
            match p {
                0 => {}
                1 => factors.push(format!("x{}", i + 1)),
                _ => factors.push(format!("x{}^{p}", i + 1)),
            }
        }
        write!(f, "{}", factors.join("*"))
    }
}

/// A polynomial in the class counts with non-negative integer coefficients.
/// Specs built through [`PolynomialSpec::new`] or [`PolynomialSpec::parse`]
/// have no singleton terms: every term involves at least two classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PolynomialSpec {
    terms: Vec<PolyTerm>,
}

impl PolynomialSpec {
    pub fn new(terms: Vec<PolyTerm>) -> Result<Self, ImpurityError> {
        if let Some(bad) = terms.iter().find(|t| t.variables() < 2) {
            return Err(ImpurityError::SingletonTerm(bad.to_string()));
        }
        Ok(PolynomialSpec { terms })
    }

    pub fn new_unchecked(terms: Vec<PolyTerm>) -> Self {
        PolynomialSpec { terms }
    }

    pub fn terms(&self) -> &[PolyTerm] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(PolyTerm::degree).max().unwrap_or(0)
    }

    /// Parses `2*x1^2*x2 + x1*x3`, where `xi` is the count of class `i`
    /// (1-based). Rejects singleton terms.
    pub fn parse(s: &str) -> Result<Self, ImpurityError> {
        Self::new(parse_terms(s)?)
    }

    pub fn parse_unchecked(s: &str) -> Result<Self, ImpurityError> {
        Ok(Self::new_unchecked(parse_terms(s)?))
    }

    pub fn evaluate(&self, counts: &[u64]) -> Result<u128, ImpurityError> {
        let mut acc: u128 = 0;
        'terms: for t in &self.terms {
            let mut v = t.coefficient as u128;
            for (i, &p) in t.exponents.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                let c = counts.get(i).copied().unwrap_or(0) as u128;
                if c == 0 {
                    continue 'terms;
                }
                let f = c.checked_pow(p).ok_or(ImpurityError::Overflow)?;
                v = v.checked_mul(f).ok_or(ImpurityError::Overflow)?;
            }
            acc = acc.checked_add(v).ok_or(ImpurityError::Overflow)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for PolynomialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(PolyTerm::to_string).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn parse_terms(s: &str) -> Result<Vec<PolyTerm>, ImpurityError> {
    let err = |reason: String| ImpurityError::Parse { input: s.to_string(), reason };
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() || compact == "0" {
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    for term in compact.split('+') {
        if term.is_empty() {
            return Err(err("empty term".into()));
        }
        let mut coefficient: u64 = 1;
        let mut exponents: Vec<u32> = Vec::new();
        for factor in term.split('*') {
            if let Some(var) = factor.strip_prefix('x') {
                let (index, power) = match var.split_once('^') {
                    Some((i, p)) => (i, p.parse::<u32>().map_err(|_| err(format!("bad exponent in `{factor}`")))?),
                    None => (var, 1),
                };
                let index: usize = index.parse().map_err(|_| err(format!("bad variable `{factor}`")))?;
                if index == 0 {
                    return Err(err("variables are numbered from x1".into()));
                }
                if exponents.len() < index {
                    exponents.resize(index, 0);
                }
                exponents[index - 1] += power;
            } else {
                let c: u64 = factor.parse().map_err(|_| err(format!("bad factor `{factor}`")))?;
                coefficient = coefficient.checked_mul(c).ok_or_else(|| err("coefficient overflows".into()))?;
            }
        }
        terms.push(PolyTerm { coefficient, exponents });
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_pairs_for_two_classes() {
        let p = PolynomialSpec::parse("x1*x2").unwrap();
        assert_eq!(p.evaluate(&[30, 30]).unwrap(), 900);
    }

    #[test]
    fn empty_spec_is_zero() {
        assert_eq!(PolynomialSpec::default().evaluate(&[4, 5]).unwrap(), 0);
        assert_eq!(PolynomialSpec::parse("").unwrap().evaluate(&[4, 5]).unwrap(), 0);
    }

    #[test]
    fn evaluates_weighted_terms() {
        let p = PolynomialSpec::new(vec![PolyTerm::new(2, vec![2, 1])]).unwrap();
        assert_eq!(p.evaluate(&[3, 4]).unwrap(), 72);
        let q = PolynomialSpec::parse("2*x1^2*x2 + x1*x3").unwrap();
        assert_eq!(q.evaluate(&[3, 4, 5]).unwrap(), 72 + 15);
        assert_eq!(q.degree(), 3);
        assert_eq!(q.to_string(), "2*x1^2*x2 + x1*x3");
    }

    #[test]
    fn singleton_terms_are_rejected() {
        assert!(matches!(PolynomialSpec::parse("x1"), Err(ImpurityError::SingletonTerm(_))));
        assert!(matches!(PolynomialSpec::parse("x1*x2 + 3*x2^2"), Err(ImpurityError::SingletonTerm(_))));
        assert!(matches!(PolynomialSpec::parse("x1*x1"), Err(ImpurityError::SingletonTerm(_))));
        assert!(matches!(PolynomialSpec::parse("5"), Err(ImpurityError::SingletonTerm(_))));
        assert!(PolynomialSpec::parse_unchecked("x1").is_ok());
    }

    #[test]
    fn malformed_expressions_fail_to_parse() {
        for bad in ["x0*x1", "x1*", "x1++x2", "y1*x2", "x1^a*x2"] {
            assert!(matches!(PolynomialSpec::parse(bad), Err(ImpurityError::Parse { .. })), "{bad}");
        }
    }
}
