use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use super::{GradedPoly, GringError, Monomial, Rational, Universe};

/// Default bound on single-monomial rewrites during one normal-form call.
pub const DEFAULT_STEP_BUDGET: usize = 1_000_000;

/// Rewrite rule `lhs → rhs`; `rhs` only contains monomials below `lhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Monomial,
    pub rhs: GradedPoly,
}

/// A critical pair whose two one-step reductions have different normal forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalPairFailure {
    pub rules: (usize, usize),
    pub overlap: Monomial,
    pub left: GradedPoly,
    pub right: GradedPoly,
}

/// A presented quotient `Q[generators] / (rules)`, truncated at `cap`, with
/// an optional integration functional on degree-`cap` monomials.
#[derive(Clone, Debug)]
pub struct RingSpec {
    universe: Arc<Universe>,
    cap: u32,
    rules: Vec<Rule>,
    integral: Option<BTreeMap<Monomial, Rational>>,
    step_budget: usize,
}

impl RingSpec {
    /// The free truncated ring on `universe`: no relations, no integral.
    pub fn free(universe: &Arc<Universe>, cap: u32) -> Self {
        RingSpec {
            universe: Arc::clone(universe),
            cap,
            rules: Vec::new(),
            integral: None,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    /// Validates rules (homogeneity, strict decrease) and confluence of all
    /// critical pairs within the cap.
    pub fn new(
        universe: &Arc<Universe>,
        cap: u32,
        rules: Vec<Rule>,
        integral: Option<BTreeMap<Monomial, Rational>>,
    ) -> Result<Self, GringError> {
        let mut spec = Self::free(universe, cap);
        for rule in rules {
            spec.check_rule(&rule)?;
            spec.rules.push(rule);
        }
        if let Some(table) = &integral {
            for m in table.keys() {
                if m.degree() != cap {
                    return Err(GringError::IntegralDegree {
                        mono: m.display(universe).to_string(),
                        degree: m.degree(),
                        cap,
                    });
                }
            }
        }
        spec.integral = integral;
        let failures = spec.critical_pair_failures()?;
        if let Some(first) = failures.first() {
            return Err(GringError::NonConfluent(
                failures.len(),
                first.overlap.display(universe).to_string(),
            ));
        }
        Ok(spec)
    }

    pub fn with_step_budget(mut self, budget: usize) -> Self {
        self.step_budget = budget;
        self
    }

    fn check_rule(&self, rule: &Rule) -> Result<(), GringError> {
        let name = || rule.lhs.display(&self.universe).to_string();
        let probe = GradedPoly::zero(&self.universe, self.cap);
        probe.check_compatible(&rule.rhs)?;
        if rule.lhs.is_one() {
            return Err(GringError::RuleNotDecreasing {
                rule: name(),
                term: "1".into(),
            });
        }
        for (m, _) in rule.rhs.terms() {
            if m.degree() != rule.lhs.degree() {
                return Err(GringError::NotHomogeneous { rule: name() });
            }
            if *m >= rule.lhs {
                return Err(GringError::RuleNotDecreasing {
                    rule: name(),
                    term: m.display(&self.universe).to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn integral_table(&self) -> Option<&BTreeMap<Monomial, Rational>> {
        self.integral.as_ref()
    }

    pub fn zero(&self) -> GradedPoly {
        GradedPoly::zero(&self.universe, self.cap)
    }

    pub fn one(&self) -> GradedPoly {
        GradedPoly::one(&self.universe, self.cap)
    }

    pub fn generator(&self, name: &str) -> Result<GradedPoly, GringError> {
        GradedPoly::generator(&self.universe, self.cap, name)
    }

    /// Rewrites until no rule's leading monomial divides any term.
    ///
    /// Terms are scanned from the largest monomial down. A rewrite only
    /// introduces monomials smaller than the one it replaces, so a single
    /// downward pass suffices.
    pub fn normal_form(&self, a: &GradedPoly) -> Result<GradedPoly, GringError> {
        let probe = self.zero();
        probe.check_compatible(a)?;
        if self.rules.is_empty() {
            return Ok(a.clone());
        }
        let mut work: BTreeMap<Monomial, Rational> =
            a.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        let mut upper: Option<Monomial> = None;
        let mut steps = 0usize;
        loop {
            let next = match &upper {
                None => work.keys().next_back().cloned(),
                Some(u) => work.range(..u.clone()).next_back().map(|(m, _)| m.clone()),
            };
            let Some(m) = next else { break };
            if let Some((rule, quotient)) = self.find_rule(&m) {
                steps += 1;
                if steps > self.step_budget {
                    return Err(GringError::NonTerminating(self.step_budget));
                }
                let c = work.remove(&m).expect("scanned key present");
                for (rm, rc) in rule.rhs.terms() {
                    let nm = rm.mul(&quotient);
                    if nm.degree() > self.cap {
                        continue;
                    }
                    let slot = work.entry(nm).or_insert_with(Rational::zero);
                    *slot += &c * rc;
                    if slot.is_zero() {
                        let key = rm.mul(&quotient);
                        work.remove(&key);
                    }
                }
            }
            upper = Some(m);
        }
        Ok(GradedPoly::from_terms(&self.universe, self.cap, work))
    }

    fn find_rule(&self, m: &Monomial) -> Option<(&Rule, Monomial)> {
        self.rules
            .iter()
            .find_map(|r| m.div(&r.lhs).map(|q| (r, q)))
    }

    /// Every critical pair (overlap of two leading monomials within the cap)
    /// whose two one-step reductions have distinct normal forms.
    pub fn critical_pair_failures(&self) -> Result<Vec<CriticalPairFailure>, GringError> {
        let mut out = Vec::new();
        for i in 0..self.rules.len() {
            for j in (i + 1)..self.rules.len() {
                let (ri, rj) = (&self.rules[i], &self.rules[j]);
                let l = ri.lhs.lcm(&rj.lhs, &self.universe);
                if l.degree() > self.cap {
                    continue;
                }
                let left = self.one_step(&l, ri)?;
                let right = self.one_step(&l, rj)?;
                let left = self.normal_form(&left)?;
                let right = self.normal_form(&right)?;
                if left != right {
                    out.push(CriticalPairFailure {
                        rules: (i, j),
                        overlap: l,
                        left,
                        right,
                    });
                }
            }
        }
        Ok(out)
    }

    fn one_step(&self, m: &Monomial, rule: &Rule) -> Result<GradedPoly, GringError> {
        let q = m.div(&rule.lhs).expect("overlap divisible by both leading monomials");
        let qp = GradedPoly::from_terms(&self.universe, self.cap, [(q, Rational::from_integer(1.into()))]);
        qp.checked_mul(&rule.rhs)
    }

    /// Σ over top-degree terms of the normal form of coefficient × table value.
    pub fn integrate(&self, a: &GradedPoly) -> Result<Rational, GringError> {
        let table = self.integral.as_ref().ok_or(GringError::NoIntegral)?;
        let nf = self.normal_form(a)?;
        let mut total = Rational::zero();
        for (m, c) in nf.terms().rev() {
            if m.degree() < self.cap {
                break;
            }
            match table.get(m) {
                Some(v) => total += c * v,
                None => {
                    return Err(GringError::MissingIntegral(
                        m.display(&self.universe).to_string(),
                    ))
                }
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gring::{int, rat, Generator};

    fn ring_h(cap: u32, kill: u32) -> RingSpec {
        let u = Universe::new(vec![Generator::new("H", 1)]).unwrap();
        let lhs = Monomial::from_exponents(&u, [(0, kill)]);
        let rhs = GradedPoly::zero(&u, cap);
        RingSpec::new(&u, cap, vec![Rule { lhs, rhs }], None).unwrap()
    }

    #[test]
    fn monomial_kill() {
        let r = ring_h(3, 3);
        let h = r.generator("H").unwrap();
        assert!(r.normal_form(&h.pow(3).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn single_rewrite() {
        let u = Universe::new(vec![Generator::new("H", 1), Generator::new("tau", 1)]).unwrap();
        let tau2 = Monomial::from_exponents(&u, [(1, 2)]);
        let h = GradedPoly::generator(&u, 2, "H").unwrap();
        let t = GradedPoly::generator(&u, 2, "tau").unwrap();
        let rhs = (&h * &t).scale(&int(-2));
        let r = RingSpec::new(&u, 2, vec![Rule { lhs: tau2, rhs: rhs.clone() }], None).unwrap();
        assert_eq!(r.normal_form(&t.pow(2).unwrap()).unwrap(), rhs);
    }

    #[test]
    fn reduce_cube_mod_square() {
        let r = ring_h(3, 2);
        let one_h = &r.one() + &r.generator("H").unwrap();
        let nf = r.normal_form(&one_h.pow(3).unwrap()).unwrap();
        assert_eq!(nf.to_string(), "1 + 3*H");
    }

    #[test]
    fn rejects_increasing_and_inhomogeneous_rules() {
        let u = Universe::new(vec![Generator::new("H", 1), Generator::new("E", 1)]).unwrap();
        let h2 = Monomial::from_exponents(&u, [(0, 2)]);
        let e = GradedPoly::generator(&u, 2, "E").unwrap();
        let bad = RingSpec::new(&u, 2, vec![Rule { lhs: h2.clone(), rhs: e.pow(2).unwrap() }], None);
        assert!(matches!(bad, Err(GringError::RuleNotDecreasing { .. })));
        let bad = RingSpec::new(&u, 2, vec![Rule { lhs: h2, rhs: e }], None);
        assert!(matches!(bad, Err(GringError::NotHomogeneous { .. })));
    }

    #[test]
    fn rejects_non_confluent_rules() {
        let u = Universe::new(vec![Generator::new("x", 1), Generator::new("y", 1)]).unwrap();
        let x = GradedPoly::generator(&u, 3, "x").unwrap();
        // y^2 -> x^2 and x*y -> x^2 overlap at x*y^2 with different results.
        let r1 = Rule {
            lhs: Monomial::from_exponents(&u, [(1, 2)]),
            rhs: x.pow(2).unwrap(),
        };
        let r2 = Rule {
            lhs: Monomial::from_exponents(&u, [(0, 1), (1, 1)]),
            rhs: x.pow(2).unwrap().scale(&int(2)),
        };
        assert!(matches!(
            RingSpec::new(&u, 3, vec![r1, r2], None),
            Err(GringError::NonConfluent(..))
        ));
    }

    #[test]
    fn blown_up_plane_integral() {
        let u = Universe::new(vec![Generator::new("H", 1), Generator::new("E", 1)]).unwrap();
        let m = |a, b| Monomial::from_exponents(&u, [(0, a), (1, b)]);
        let table: BTreeMap<_, _> = [(m(2, 0), int(1)), (m(1, 1), int(0)), (m(0, 2), int(-1))].into();
        let r = RingSpec::new(&u, 2, vec![], Some(table)).unwrap();
        let h = r.generator("H").unwrap();
        let e = r.generator("E").unwrap();
        let x = &h.pow(2).unwrap().scale(&int(3)) - &e.pow(2).unwrap();
        assert_eq!(r.integrate(&x).unwrap(), int(4));
        let partial: BTreeMap<_, _> = [(m(2, 0), int(1))].into();
        let r = RingSpec::new(&u, 2, vec![], Some(partial)).unwrap();
        assert!(matches!(r.integrate(&x), Err(GringError::MissingIntegral(_))));
    }

    #[test]
    fn weighted_line_integral() {
        let u = Universe::new(vec![Generator::new("tau", 1)]).unwrap();
        let table: BTreeMap<_, _> = [(Monomial::from_exponents(&u, [(0, 2)]), rat(1, 2))].into();
        let r = RingSpec::new(&u, 2, vec![], Some(table)).unwrap();
        let t = r.generator("tau").unwrap();
        assert_eq!(r.integrate(&t.pow(2).unwrap()).unwrap(), rat(1, 2));
    }

    #[test]
    fn step_budget_is_enforced() {
        let r = ring_h(6, 2).with_step_budget(1);
        let one_h = &r.one() + &r.generator("H").unwrap();
        assert_eq!(
            r.normal_form(&one_h.pow(6).unwrap()),
            Err(GringError::NonTerminating(1))
        );
    }
}
