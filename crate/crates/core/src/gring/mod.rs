//! Exact, truncated, graded sparse polynomials over the rationals.
//!
//! Every class the engine manipulates (Chern classes, divisor classes,
//! exceptional divisors, ψ-classes) is a [`GradedPoly`]: a finite sum of
//! monomials in named generators with [`Rational`] coefficients, truncated
//! above a cap degree. Quotient rings are presented by a [`RingSpec`]
//! carrying degree-homogeneous rewrite rules and an optional integration
//! functional on top-degree monomials.

mod monomial;
mod poly;
mod ring;
mod serial;

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

pub use monomial::{Monomial, MonomialDisplay};
pub use poly::{GradedPoly, Substitution};
pub use ring::{CriticalPairFailure, RingSpec, Rule, DEFAULT_STEP_BUDGET};
pub use serial::{MonoJson, PolyJson, RingSpecJson, RuleJson, TermJson, IntegralJson, GeneratorJson};

/// Exact rational coefficient, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"`; decimals are rejected.
pub fn parse_rational(s: &str) -> Result<Rational, GringError> {
    let t = s.trim();
    if t.is_empty() || t.contains('.') || t.contains('e') || t.contains('E') {
        return Err(GringError::BadRational(s.to_string()));
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n = BigInt::from_str(num).map_err(|_| GringError::BadRational(s.to_string()))?;
    let d = BigInt::from_str(den).map_err(|_| GringError::BadRational(s.to_string()))?;
    if d == BigInt::from(0) {
        return Err(GringError::BadRational(s.to_string()));
    }
    Ok(BigRational::new(n, d))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GringError {
    #[error("cap mismatch: {0} vs {1}")]
    CapMismatch(u32, u32),
    #[error("polynomials live over different generator sets")]
    UniverseMismatch,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("invalid generator `{name}`: {reason}")]
    InvalidGenerator { name: String, reason: String },
    #[error("constant term is zero; no inverse")]
    NotAUnit,
    #[error("rule `{rule}` is not degree-homogeneous")]
    NotHomogeneous { rule: String },
    #[error("rule `{rule}` does not decrease the monomial order (term `{term}`)")]
    RuleNotDecreasing { rule: String, term: String },
    #[error("rule set is not confluent: {0} critical pair(s) disagree, first at `{1}`")]
    NonConfluent(usize, String),
    #[error("rewriting exceeded the step budget of {0}")]
    NonTerminating(usize),
    #[error("ring has no integration functional")]
    NoIntegral,
    #[error("integral table lacks top-degree monomial `{0}`")]
    MissingIntegral(String),
    #[error("integral entry `{mono}` has degree {degree}, expected top degree {cap}")]
    IntegralDegree { mono: String, degree: u32, cap: u32 },
    #[error("degree {k} exceeds cap {cap}")]
    DegreeAboveCap { k: u32, cap: u32 },
    #[error("expected a homogeneous degree-1 class")]
    NotDegreeOne,
    #[error("malformed rational `{0}`")]
    BadRational(String),
    #[error("malformed polynomial: {0}")]
    Parse(String),
}

/// A named generator of cohomological degree `degree`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
}

impl Generator {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        Generator {
            name: name.into(),
            degree,
        }
    }
}

/// The ordered generator set a family of polynomials lives over.
///
/// Declaration order fixes the monomial order (see [`Monomial`]).
#[derive(Debug)]
pub struct Universe {
    generators: Vec<Generator>,
    index: HashMap<String, usize>,
}

impl PartialEq for Universe {
    fn eq(&self, other: &Self) -> bool {
        self.generators == other.generators
    }
}

impl Eq for Universe {}

impl Universe {
    pub fn new(generators: Vec<Generator>) -> Result<Arc<Self>, GringError> {
        if generators.len() > u16::MAX as usize {
            return Err(GringError::InvalidGenerator {
                name: format!("#{}", generators.len()),
                reason: "too many generators".into(),
            });
        }
        let mut index = HashMap::with_capacity(generators.len());
        for (i, g) in generators.iter().enumerate() {
            validate_name(&g.name)?;
            if g.degree == 0 {
                return Err(GringError::InvalidGenerator {
                    name: g.name.clone(),
                    reason: "degree must be positive".into(),
                });
            }
            if index.insert(g.name.clone(), i).is_some() {
                return Err(GringError::DuplicateGenerator(g.name.clone()));
            }
        }
        Ok(Arc::new(Universe { generators, index }))
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, GringError> {
        self.index_of(name)
            .ok_or_else(|| GringError::UnknownGenerator(name.to_string()))
    }
}

fn validate_name(name: &str) -> Result<(), GringError> {
    let bad = |reason: &str| GringError::InvalidGenerator {
        name: name.to_string(),
        reason: reason.to_string(),
    };
    if name.is_empty() {
        return Err(bad("empty name"));
    }
    if name
        .chars()
        .any(|c| c.is_whitespace() || matches!(c, '*' | '+' | '-' | '^' | '/' | '"'))
    {
        return Err(bad("names may not contain whitespace or arithmetic symbols"));
    }
    if name.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        return Err(bad("names may not start with a digit"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_parse_in_lowest_terms() {
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert_eq!(parse_rational("2/-4").unwrap(), rat(-1, 2));
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn universe_rejects_bad_generators() {
        assert!(matches!(
            Universe::new(vec![Generator::new("H", 1), Generator::new("H", 1)]),
            Err(GringError::DuplicateGenerator(_))
        ));
        assert!(Universe::new(vec![Generator::new("H", 0)]).is_err());
        assert!(Universe::new(vec![Generator::new("a*b", 1)]).is_err());
        assert!(Universe::new(vec![Generator::new("D{1,2}", 1)]).is_ok());
    }
}
