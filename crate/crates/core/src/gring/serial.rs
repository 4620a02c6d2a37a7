//! JSON shapes for polynomials and ring presentations.
//!
//! A polynomial is `{"cap": n, "terms": [{"mono": {"H": 2}, "coef": "3/2"}]}`
//! with terms in ascending graded-lex order. Coefficients are `"p/q"` or
//! `"p"` strings; decimals are rejected.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{parse_rational, GradedPoly, Generator, GringError, Monomial, RingSpec, Rule, Universe};

/// Exponent map keyed by generator name.
pub type MonoJson = BTreeMap<String, u32>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub mono: MonoJson,
    pub coef: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u32>,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorJson {
    pub name: String,
    pub degree: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleJson {
    pub lhs_mono: MonoJson,
    pub rhs_poly: PolyJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralJson {
    pub mono: MonoJson,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpecJson {
    pub generators: Vec<GeneratorJson>,
    #[serde(default)]
    pub relations: Vec<RuleJson>,
    pub cap: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integral: Option<Vec<IntegralJson>>,
}

impl Monomial {
    pub fn from_json(universe: &Universe, json: &MonoJson) -> Result<Monomial, GringError> {
        let pairs = json
            .iter()
            .map(|(name, &e)| universe.require(name).map(|i| (i, e)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Monomial::from_exponents(universe, pairs))
    }

    pub fn to_json(&self, universe: &Universe) -> MonoJson {
        self.exponents()
            .iter()
            .map(|&(i, e)| (universe.generators()[i as usize].name.clone(), e))
            .collect()
    }
}

impl GradedPoly {
    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            cap: Some(self.cap()),
            terms: self
                .terms()
                .map(|(m, c)| TermJson {
                    mono: m.to_json(self.universe()),
                    coef: c.to_string(),
                })
                .collect(),
        }
    }

    /// Reads a polynomial over `universe`. A `cap` in the JSON must agree
    /// with `cap` when both are given; terms above the cap, repeated
    /// monomials, and zero coefficients are rejected.
    pub fn from_json(
        universe: &Arc<Universe>,
        cap: Option<u32>,
        json: &PolyJson,
    ) -> Result<GradedPoly, GringError> {
        let cap = match (cap, json.cap) {
            (Some(a), Some(b)) if a != b => return Err(GringError::CapMismatch(a, b)),
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(GringError::Parse("missing cap".into())),
        };
        let mut seen = std::collections::BTreeSet::new();
        let mut terms = Vec::with_capacity(json.terms.len());
        for t in &json.terms {
            let m = Monomial::from_json(universe, &t.mono)?;
            let c = parse_rational(&t.coef)?;
            let shown = m.display(universe).to_string();
            if m.degree() > cap {
                return Err(GringError::DegreeAboveCap { k: m.degree(), cap });
            }
            if num_traits::Zero::is_zero(&c) {
                return Err(GringError::Parse(format!("zero coefficient on `{shown}`")));
            }
            if !seen.insert(m.clone()) {
                return Err(GringError::Parse(format!("repeated monomial `{shown}`")));
            }
            terms.push((m, c));
        }
        Ok(GradedPoly::from_terms(universe, cap, terms))
    }
}

impl RingSpec {
    pub fn from_json(json: &RingSpecJson) -> Result<RingSpec, GringError> {
        let universe = Universe::new(
            json.generators
                .iter()
                .map(|g| Generator::new(g.name.clone(), g.degree))
                .collect(),
        )?;
        let cap = json.cap;
        let rules = json
            .relations
            .iter()
            .map(|r| {
                Ok(Rule {
                    lhs: Monomial::from_json(&universe, &r.lhs_mono)?,
                    rhs: GradedPoly::from_json(&universe, Some(cap), &r.rhs_poly)?,
                })
            })
            .collect::<Result<Vec<_>, GringError>>()?;
        let integral = match &json.integral {
            None => None,
            Some(entries) => {
                let mut table = BTreeMap::new();
                for e in entries {
                    let m = Monomial::from_json(&universe, &e.mono)?;
                    if table.insert(m.clone(), parse_rational(&e.value)?).is_some() {
                        return Err(GringError::Parse(format!(
                            "repeated integral entry `{}`",
                            m.display(&universe)
                        )));
                    }
                }
                Some(table)
            }
        };
        RingSpec::new(&universe, cap, rules, integral)
    }

    pub fn to_json(&self) -> RingSpecJson {
        let u = self.universe();
        RingSpecJson {
            generators: u
                .generators()
                .iter()
                .map(|g| GeneratorJson {
                    name: g.name.clone(),
                    degree: g.degree,
                })
                .collect(),
            relations: self
                .rules()
                .iter()
                .map(|r| RuleJson {
                    lhs_mono: r.lhs.to_json(u),
                    rhs_poly: PolyJson {
                        cap: None,
                        ..r.rhs.to_json()
                    },
                })
                .collect(),
            cap: self.cap(),
            integral: self.integral_table().map(|t| {
                t.iter()
                    .map(|(m, v)| IntegralJson {
                        mono: m.to_json(u),
                        value: v.to_string(),
                    })
                    .collect()
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gring::int;

    #[test]
    fn polynomial_round_trip() {
        let u = Universe::new(vec![Generator::new("H", 1), Generator::new("psi", 1)]).unwrap();
        let h = GradedPoly::generator(&u, 2, "H").unwrap();
        let psi = GradedPoly::generator(&u, 2, "psi").unwrap();
        let p = &(&GradedPoly::one(&u, 2) + &h.scale(&int(3))) - &(&h * &psi).scale(&crate::gring::rat(5, 2));
        let text = serde_json::to_string(&p.to_json()).unwrap();
        assert_eq!(
            text,
            r#"{"cap":2,"terms":[{"mono":{},"coef":"1"},{"mono":{"H":1},"coef":"3"},{"mono":{"H":1,"psi":1},"coef":"-5/2"}]}"#
        );
        let back: PolyJson = serde_json::from_str(&text).unwrap();
        assert_eq!(GradedPoly::from_json(&u, None, &back).unwrap(), p);
    }

    #[test]
    fn malformed_polynomials_are_rejected() {
        let u = Universe::new(vec![Generator::new("H", 1)]).unwrap();
        let parse = |s: &str| -> Result<GradedPoly, GringError> {
            let j: PolyJson = serde_json::from_str(s).map_err(|e| GringError::Parse(e.to_string()))?;
            GradedPoly::from_json(&u, None, &j)
        };
        assert!(parse(r#"{"cap":1,"terms":[{"mono":{"H":2},"coef":"1"}]}"#).is_err());
        assert!(parse(r#"{"cap":1,"terms":[{"mono":{"X":1},"coef":"1"}]}"#).is_err());
        assert!(parse(r#"{"cap":1,"terms":[{"mono":{"H":1},"coef":"0.5"}]}"#).is_err());
        assert!(parse(r#"{"cap":1,"terms":[],"extra":1}"#).is_err());
        assert!(parse(r#"{"terms":[]}"#).is_err());
    }

    #[test]
    fn ring_spec_round_trip() {
        let text = r#"{"generators":[{"name":"H","degree":1},{"name":"tau","degree":1}],
            "relations":[{"lhs_mono":{"tau":2},"rhs_poly":{"terms":[{"mono":{"H":1,"tau":1},"coef":"-2"}]}},
                         {"lhs_mono":{"H":2},"rhs_poly":{"terms":[]}}],
            "cap":2,
            "integral":[{"mono":{"H":1,"tau":1},"value":"1"}]}"#;
        let json: RingSpecJson = serde_json::from_str(text).unwrap();
        let ring = RingSpec::from_json(&json).unwrap();
        let again = RingSpec::from_json(&ring.to_json()).unwrap();
        assert_eq!(again.to_json(), ring.to_json());
        let t = again.generator("tau").unwrap();
        assert_eq!(again.integrate(&t.pow(2).unwrap()).unwrap(), int(-2));
    }
}
