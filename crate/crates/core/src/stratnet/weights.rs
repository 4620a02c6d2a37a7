//! Probabilistic weights on a network and the pushforward they define.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use super::{index_name, is_subset, ser_rat, Index, StratnetError, StratumNetwork};
use crate::gring::Rational;

/// Weight of the generic point of each stratum.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WeightTable {
    weights: BTreeMap<Index, Rational>,
}

impl WeightTable {
    pub fn get(&self, i: &[u32]) -> Option<&Rational> {
        self.weights.get(i)
    }

    pub fn insert(&mut self, i: Index, w: Rational) {
        self.weights.insert(i, w);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Index, &Rational)> {
        self.weights.iter()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn require(&self, i: &[u32]) -> Result<&Rational, StratnetError> {
        self.get(i).ok_or_else(|| StratnetError::MissingWeight(index_name(i)))
    }

    /// `{"{1,2}": "1/6", …}` keyed by index name.
    pub fn to_named(&self) -> BTreeMap<String, String> {
        self.weights
            .iter()
            .map(|(i, w)| (index_name(i), w.to_string()))
            .collect()
    }
}

/// A stratum where the weight is not the degree-weighted sum over one higher level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightDegreeFailure {
    pub index: Index,
    /// Rank of the strata summed over.
    pub level: usize,
    #[serde(serialize_with = "ser_rat")]
    pub weight: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub sum: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightReport {
    pub table: WeightTable,
    pub checked: usize,
    pub failures: Vec<WeightDegreeFailure>,
}

/// `w(I) = 1 / (|P_k| · [Y_I → X])` for `I` of rank `k`, then the
/// weight-degree identity `w(I) = Σ_{J ⊃ I, rank j} [Y_J → Y_I] w(J)` is
/// checked for every rank `j` above `I` that has indices containing `I`.
pub fn compute_weights(net: &StratumNetwork) -> WeightReport {
    let mut table = WeightTable::default();
    for s in net.strata() {
        let size = net.level(s.rank).len();
        let degree = net.total_degree(&s.index, &[]).expect("every index contains the empty one");
        let w = (Rational::from_integer(size.into()) * degree).recip();
        table.insert(s.index.clone(), w);
    }
    let mut checked = 0;
    let mut failures = Vec::new();
    for s in net.strata() {
        let w = table.get(&s.index).expect("just inserted").clone();
        for level in s.rank + 1..=net.top_rank() {
            let above: Vec<&Index> = net
                .level(level)
                .into_iter()
                .filter(|j| is_subset(&s.index, j))
                .collect();
            if above.is_empty() {
                continue;
            }
            checked += 1;
            let sum: Rational = above
                .iter()
                .map(|j| net.total_degree(j, &s.index).expect("nested") * table.get(j).expect("weighted"))
                .sum();
            if sum != w {
                failures.push(WeightDegreeFailure {
                    index: s.index.clone(),
                    level,
                    weight: w.clone(),
                    sum,
                });
            }
        }
    }
    WeightReport {
        table,
        checked,
        failures,
    }
}

/// One summand `coefficient · [V]` of a cycle on the cover, where `V` has its
/// generic point in stratum `source` and maps with degree `degree` onto the
/// class named `image`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleTerm {
    pub coefficient: Rational,
    pub source: Index,
    pub image: String,
    pub degree: Rational,
}

/// `f_*[V] = w(V) · deg(V/W) · [W]`, extended linearly; zero results are dropped.
pub fn pushforward(
    net: &StratumNetwork,
    weights: &WeightTable,
    cycle: &[CycleTerm],
) -> Result<BTreeMap<String, Rational>, StratnetError> {
    let mut out: BTreeMap<String, Rational> = BTreeMap::new();
    for t in cycle {
        if !net.contains(&t.source) {
            return Err(StratnetError::UnknownIndex(index_name(&t.source)));
        }
        let w = weights.require(&t.source)?;
        *out.entry(t.image.clone()).or_insert_with(Rational::zero) += &t.coefficient * w * &t.degree;
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectionClassCheck {
    /// Stratum whose image in the base carries the basis class.
    pub stratum: Index,
    /// Number of preimage components, counted with multiplicity.
    #[serde(serialize_with = "ser_rat")]
    pub components: Rational,
    /// Coefficient of the class after pulling back and pushing forward.
    #[serde(serialize_with = "ser_rat")]
    pub factor: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectionReport {
    pub base: Index,
    #[serde(serialize_with = "ser_rat")]
    pub expected: Rational,
    pub classes: Vec<SectionClassCheck>,
    pub uniform: bool,
    pub holds: bool,
}

impl SectionReport {
    pub fn factors(&self) -> BTreeMap<String, Rational> {
        self.classes
            .iter()
            .map(|c| (index_name(&c.stratum), c.factor.clone()))
            .collect()
    }
}

/// Pulls back the class of each stratum image in `Y_base` and pushes it
/// forward again.
///
/// A class generic in the image of `Y_J`, of rank `j`, pulls back to the
/// components lying over it: one for each rank-`j` index `J′ ⊇ base`, with
/// multiplicity `[Y_J′ → Y_base]`. Each carries the weight `w(J′)/w(base)`
/// relative to the cover of `Y_base`, and maps with degree one onto its
/// image, so the class returns multiplied by the sum of those weighted
/// multiplicities. The identity holds when that factor equals `d` for every
/// stratum.
pub fn verify_section_identity(
    net: &StratumNetwork,
    weights: &WeightTable,
    base: &[u32],
    d: &Rational,
) -> Result<SectionReport, StratnetError> {
    let rank = net.rank_of(base)?;
    let w_base = weights.require(base)?.clone();
    let mut classes = Vec::new();
    for s in net.strata().iter().filter(|s| s.rank >= rank) {
        if !is_subset(base, &s.index) || !net.reaches(&s.index, base)? {
            continue;
        }
        let mut components = Rational::zero();
        let mut factor = Rational::zero();
        for j in net.level(s.rank).into_iter().filter(|j| is_subset(base, j)) {
            let mult = net.total_degree(j, base)?;
            let rel = weights.require(j)? / &w_base;
            factor += &mult * &rel;
            components += mult;
        }
        classes.push(SectionClassCheck {
            stratum: s.index.clone(),
            components,
            factor,
        });
    }
    let first = classes.first().map_or_else(Rational::one, |c| c.factor.clone());
    let uniform = classes.iter().all(|c| c.factor == first);
    let holds = uniform && &first == d;
    Ok(SectionReport {
        base: base.to_vec(),
        expected: d.clone(),
        classes,
        uniform,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gring::{int, rat};

    fn two_point(degree: i64) -> StratumNetwork {
        StratumNetwork::new(
            vec![(vec![], 0), (vec![1], 1), (vec![2], 1)],
            vec![(vec![1], vec![], int(degree)), (vec![2], vec![], int(degree))],
        )
        .unwrap()
    }

    #[test]
    fn weights_of_small_networks() {
        let bottom = StratumNetwork::new(vec![(vec![], 0)], vec![]).unwrap();
        let r = compute_weights(&bottom);
        assert_eq!(r.table.get(&[]), Some(&int(1)));
        assert_eq!(r.checked, 0);

        let three = StratumNetwork::new(
            vec![(vec![], 0), (vec![1], 1), (vec![2], 1), (vec![3], 1)],
            vec![
                (vec![1], vec![], int(1)),
                (vec![2], vec![], int(1)),
                (vec![3], vec![], int(1)),
            ],
        )
        .unwrap();
        let r = compute_weights(&three);
        for i in 1..=3 {
            assert_eq!(r.table.get(&[i]), Some(&rat(1, 3)));
        }

        let r = compute_weights(&two_point(2));
        assert_eq!(r.table.get(&[1]), Some(&rat(1, 4)));
        assert_eq!(r.table.get(&[2]), Some(&rat(1, 4)));
        let sum = int(2) * rat(1, 4) + int(2) * rat(1, 4);
        assert_eq!(sum, int(1));
        assert!(r.failures.is_empty());
        assert_eq!(r.checked, 1);
    }

    #[test]
    fn weight_degree_on_boolean_lattices() {
        for n in 1..=4 {
            for d in 1..=3 {
                let net = StratumNetwork::boolean_lattice(n, int(d)).unwrap();
                let r = compute_weights(&net);
                assert!(r.failures.is_empty(), "n={n} d={d}: {:?}", r.failures);
                assert_eq!(r.table.get(&[]), Some(&int(1)));
            }
        }
    }

    #[test]
    fn pushforward_examples() {
        let net = two_point(1);
        let w = compute_weights(&net).table;
        let generic = [CycleTerm {
            coefficient: int(1),
            source: vec![],
            image: "[X]".into(),
            degree: int(1),
        }];
        assert_eq!(pushforward(&net, &w, &generic).unwrap()["[X]"], int(1));
        let on_stratum = CycleTerm {
            coefficient: int(1),
            source: vec![1],
            image: "[W]".into(),
            degree: int(1),
        };
        assert_eq!(pushforward(&net, &w, std::slice::from_ref(&on_stratum)).unwrap()["[W]"], rat(1, 2));
        let both = [
            on_stratum,
            CycleTerm {
                coefficient: int(1),
                source: vec![2],
                image: "[W]".into(),
                degree: int(1),
            },
        ];
        assert_eq!(pushforward(&net, &w, &both).unwrap()["[W]"], int(1));
        let partial = WeightTable::default();
        assert!(matches!(
            pushforward(&net, &partial, &both),
            Err(StratnetError::MissingWeight(_))
        ));
    }

    #[test]
    fn section_identity_small() {
        let bottom = StratumNetwork::new(vec![(vec![], 0)], vec![]).unwrap();
        let w = compute_weights(&bottom).table;
        let r = verify_section_identity(&bottom, &w, &[], &int(1)).unwrap();
        assert!(r.holds);
        assert_eq!(r.classes.len(), 1);

        let net = two_point(1);
        let w = compute_weights(&net).table;
        let r = verify_section_identity(&net, &w, &[], &int(1)).unwrap();
        assert!(r.holds);
        let over_point = &r.classes[1];
        assert_eq!(over_point.components, int(2));
        assert_eq!(over_point.factor, int(1));
    }

    #[test]
    fn section_identity_on_sub_bases() {
        let net = StratumNetwork::boolean_lattice(3, int(2)).unwrap();
        let w = compute_weights(&net).table;
        for s in net.strata() {
            let r = verify_section_identity(&net, &w, &s.index, &int(1)).unwrap();
            assert!(r.holds, "{:?}", r);
        }
    }

    #[test]
    fn inhomogeneous_section_factor_varies() {
        // {1} has two covers above it, {2} has one.
        let net = StratumNetwork::down_closure(&[vec![1, 2], vec![1, 3]], int(1)).unwrap();
        let w = compute_weights(&net).table;
        assert!(verify_section_identity(&net, &w, &[], &int(1)).unwrap().holds);
        let r = verify_section_identity(&net, &w, &[1], &int(1)).unwrap();
        assert_eq!(r.classes[1].factor, rat(3, 2));
        assert!(!r.uniform);
        assert!(!r.holds);
    }
}
