//! Stratum networks: ranked posets of index sets with degrees on covers.
//!
//! A network models the iterated self-intersection strata `Y_I` of a local
//! embedding. Degrees are stored on cover relations only; the degree of a
//! longer step `Y_K → Y_J` is the number of saturated chains times the edge
//! product along any one of them, which is well defined because every
//! network is checked for chain-product independence when it is built.

mod chow;
mod weights;

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gring::{parse_rational, GringError, Rational};

pub use chow::{
    network_product, DecompositionData, DecompositionJson, DecompositionTerm, CoverMapsJson,
    ProductData, SpaceJson, StratumSpaces, ClassJson,
};
pub use weights::{
    compute_weights, pushforward, verify_section_identity, CycleTerm, SectionClassCheck,
    SectionReport, WeightDegreeFailure, WeightReport, WeightTable,
};

/// An index set, kept sorted and free of repeats.
pub type Index = Vec<u32>;

pub fn index_name(i: &[u32]) -> String {
    let parts: Vec<String> = i.iter().map(u32::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

fn is_subset(small: &[u32], big: &[u32]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

fn chain_name(chain: &[Index]) -> String {
    let parts: Vec<String> = chain.iter().map(|i| index_name(i)).collect();
    parts.join(" > ")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StratnetError {
    #[error("index {0} is listed twice")]
    DuplicateStratum(String),
    #[error("index {0} repeats an element")]
    RepeatedElement(String),
    #[error("the rank-0 level must consist of exactly the empty index: {0}")]
    Bottom(String),
    #[error("unknown index {0}")]
    UnknownIndex(String),
    #[error("cover {upper} > {lower}: {reason}")]
    BadCover { upper: String, lower: String, reason: String },
    #[error("stratum {0} has positive rank but covers nothing")]
    Dangling(String),
    #[error("edge products differ between chains {first} (product {first_product}) and {second} (product {second_product})")]
    ChainProduct {
        first: String,
        first_product: String,
        second: String,
        second_product: String,
    },
    #[error("{lower} is not contained in {upper}")]
    NotContained { upper: String, lower: String },
    #[error("no weight for index {0}")]
    MissingWeight(String),
    #[error("no ring supplied at index {0}")]
    MissingRing(String),
    #[error("no Gysin pullback from {from} to {to}")]
    MissingGysin { from: String, to: String },
    #[error("no normal class for {lower} inside {upper}")]
    MissingNormalClass { lower: String, upper: String },
    #[error("no linear data at index {0}")]
    MissingSpaces(String),
    #[error("no pushforward maps for cover {upper} > {lower}")]
    MissingCoverMaps { upper: String, lower: String },
    #[error("linear data at {index}: {reason}")]
    Exactness { index: String, reason: String },
    #[error("class at {index} has length {found}, expected {expected}")]
    ClassLength { index: String, found: usize, expected: usize },
    #[error(transparent)]
    Ring(#[from] GringError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    pub index: Index,
    pub rank: usize,
}

/// Chain bookkeeping from one upper stratum to a reachable lower one.
#[derive(Clone, Debug)]
struct Reach {
    chains: u128,
    product: Rational,
}

#[derive(Clone, Debug)]
pub struct StratumNetwork {
    strata: Vec<Stratum>,
    position: HashMap<Index, usize>,
    below: Vec<Vec<(usize, Rational)>>,
    above: Vec<Vec<(usize, Rational)>>,
    by_rank: Vec<Vec<usize>>,
    reach: Vec<HashMap<usize, Reach>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratumJson {
    pub index: Vec<u32>,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverJson {
    pub upper: Vec<u32>,
    pub lower: Vec<u32>,
    pub degree: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkJson {
    pub strata: Vec<StratumJson>,
    pub covers: Vec<CoverJson>,
}

impl StratumNetwork {
    /// Builds and validates a network from strata and `(upper, lower, degree)` covers.
    pub fn new(
        strata: Vec<(Index, usize)>,
        covers: Vec<(Index, Index, Rational)>,
    ) -> Result<Self, StratnetError> {
        let mut list = Vec::with_capacity(strata.len());
        for (mut index, rank) in strata {
            let before = index.len();
            index.sort_unstable();
            index.dedup();
            if index.len() != before {
                return Err(StratnetError::RepeatedElement(index_name(&index)));
            }
            list.push(Stratum { index, rank });
        }
        list.sort_by(|a, b| (a.rank, &a.index).cmp(&(b.rank, &b.index)));
        let mut position = HashMap::new();
        for (i, s) in list.iter().enumerate() {
            if position.insert(s.index.clone(), i).is_some() {
                return Err(StratnetError::DuplicateStratum(index_name(&s.index)));
            }
        }
        let bottoms: Vec<&Stratum> = list.iter().filter(|s| s.rank == 0).collect();
        if bottoms.len() != 1 || !bottoms[0].index.is_empty() {
            let names: Vec<String> = bottoms.iter().map(|s| index_name(&s.index)).collect();
            return Err(StratnetError::Bottom(format!("found [{}]", names.join(", "))));
        }
        let top = list.last().map_or(0, |s| s.rank);
        let mut by_rank = vec![Vec::new(); top + 1];
        for (i, s) in list.iter().enumerate() {
            by_rank[s.rank].push(i);
        }

        let n = list.len();
        let mut below: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
        let mut above: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
        for (mut upper, mut lower, degree) in covers {
            upper.sort_unstable();
            lower.sort_unstable();
            let bad = |reason: &str| StratnetError::BadCover {
                upper: index_name(&upper),
                lower: index_name(&lower),
                reason: reason.to_string(),
            };
            let u = *position
                .get(&upper)
                .ok_or_else(|| StratnetError::UnknownIndex(index_name(&upper)))?;
            let l = *position
                .get(&lower)
                .ok_or_else(|| StratnetError::UnknownIndex(index_name(&lower)))?;
            if upper == lower || !is_subset(&lower, &upper) {
                return Err(bad("lower index must be a strict subset of the upper one"));
            }
            if list[u].rank != list[l].rank + 1 {
                return Err(bad("ranks must differ by exactly one"));
            }
            if degree <= Rational::zero() {
                return Err(bad("degree must be positive"));
            }
            if below[u].iter().any(|&(x, _)| x == l) {
                return Err(bad("listed twice"));
            }
            below[u].push((l, degree.clone()));
            above[l].push((u, degree));
        }
        for (i, s) in list.iter().enumerate() {
            if s.rank > 0 && below[i].is_empty() {
                return Err(StratnetError::Dangling(index_name(&s.index)));
            }
            below[i].sort_by_key(|&(x, _)| x);
            above[i].sort_by_key(|&(x, _)| x);
        }

        let mut net = StratumNetwork {
            strata: list,
            position,
            below,
            above,
            by_rank,
            reach: Vec::new(),
        };
        net.reach = (0..n).map(|k| net.walk_down(k)).collect::<Result<_, _>>()?;
        Ok(net)
    }

    /// Counts chains and checks edge products from `top` to everything below.
    fn walk_down(&self, top: usize) -> Result<HashMap<usize, Reach>, StratnetError> {
        let mut reach: HashMap<usize, Reach> = HashMap::new();
        let mut witness: HashMap<usize, Vec<usize>> = HashMap::new();
        reach.insert(
            top,
            Reach {
                chains: 1,
                product: Rational::one(),
            },
        );
        witness.insert(top, vec![top]);
        for rank in (0..=self.strata[top].rank).rev() {
            for &node in &self.by_rank[rank] {
                let Some(here) = reach.get(&node).cloned() else {
                    continue;
                };
                for (next, degree) in &self.below[node] {
                    let product = &here.product * degree;
                    match reach.get_mut(next) {
                        None => {
                            reach.insert(
                                *next,
                                Reach {
                                    chains: here.chains,
                                    product,
                                },
                            );
                            let mut w = witness[&node].clone();
                            w.push(*next);
                            witness.insert(*next, w);
                        }
                        Some(r) => {
                            if r.product != product {
                                let mut other = witness[&node].clone();
                                other.push(*next);
                                return Err(StratnetError::ChainProduct {
                                    first: chain_name(&self.chain_indices(&witness[next])),
                                    first_product: r.product.to_string(),
                                    second: chain_name(&self.chain_indices(&other)),
                                    second_product: product.to_string(),
                                });
                            }
                            r.chains += here.chains;
                        }
                    }
                }
            }
        }
        Ok(reach)
    }

    fn chain_indices(&self, chain: &[usize]) -> Vec<Index> {
        chain.iter().map(|&i| self.strata[i].index.clone()).collect()
    }

    /// The Boolean lattice of all subsets of `{1..n}` with one degree on every cover.
    pub fn boolean_lattice(n: u32, degree: Rational) -> Result<Self, StratnetError> {
        let mut strata = Vec::new();
        let mut covers = Vec::new();
        for mask in 0u32..(1 << n) {
            let index: Index = (0..n).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).collect();
            for &x in &index {
                let lower: Index = index.iter().copied().filter(|&y| y != x).collect();
                covers.push((index.clone(), lower, degree.clone()));
            }
            let rank = index.len();
            strata.push((index, rank));
        }
        Self::new(strata, covers)
    }

    /// The full subset-closed family generated by `tops`, ranked by size,
    /// with every inclusion of consecutive sizes as a cover of degree `degree`.
    pub fn down_closure(tops: &[Index], degree: Rational) -> Result<Self, StratnetError> {
        let mut family: Vec<Index> = Vec::new();
        for top in tops {
            let mut t = top.clone();
            t.sort_unstable();
            t.dedup();
            for mask in 0u64..(1u64 << t.len()) {
                let s: Index = t
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask & (1 << b) != 0)
                    .map(|(_, &x)| x)
                    .collect();
                family.push(s);
            }
        }
        family.sort();
        family.dedup();
        let mut covers = Vec::new();
        for upper in &family {
            for &x in upper {
                let lower: Index = upper.iter().copied().filter(|&y| y != x).collect();
                covers.push((upper.clone(), lower, degree.clone()));
            }
        }
        let strata = family.into_iter().map(|i| {
            let r = i.len();
            (i, r)
        });
        Self::new(strata.collect(), covers)
    }

    pub fn from_json(json: &NetworkJson) -> Result<Self, StratnetError> {
        let strata = json.strata.iter().map(|s| (s.index.clone(), s.rank)).collect();
        let covers = json
            .covers
            .iter()
            .map(|c| Ok((c.upper.clone(), c.lower.clone(), parse_rational(&c.degree)?)))
            .collect::<Result<Vec<_>, GringError>>()?;
        Self::new(strata, covers)
    }

    pub fn to_json(&self) -> NetworkJson {
        let strata = self
            .strata
            .iter()
            .map(|s| StratumJson {
                index: s.index.clone(),
                rank: s.rank,
            })
            .collect();
        let mut covers = Vec::new();
        for (u, list) in self.below.iter().enumerate() {
            for (l, d) in list {
                covers.push(CoverJson {
                    upper: self.strata[u].index.clone(),
                    lower: self.strata[*l].index.clone(),
                    degree: d.to_string(),
                });
            }
        }
        NetworkJson { strata, covers }
    }

    /// Strata ordered by rank, then lexicographically by index.
    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn top_rank(&self) -> usize {
        self.by_rank.len() - 1
    }

    pub fn contains(&self, i: &[u32]) -> bool {
        self.position.contains_key(i)
    }

    pub fn rank_of(&self, i: &[u32]) -> Result<usize, StratnetError> {
        Ok(self.strata[self.pos(i)?].rank)
    }

    /// Indices of rank `k`, in lexicographic order.
    pub fn level(&self, k: usize) -> Vec<&Index> {
        self.by_rank
            .get(k)
            .map(|v| v.iter().map(|&i| &self.strata[i].index).collect())
            .unwrap_or_default()
    }

    /// Upper covers of `i` with their degrees.
    pub fn covers_above(&self, i: &[u32]) -> Result<Vec<(&Index, &Rational)>, StratnetError> {
        let p = self.pos(i)?;
        Ok(self.above[p].iter().map(|(u, d)| (&self.strata[*u].index, d)).collect())
    }

    /// Lower covers of `i` with their degrees.
    pub fn covers_below(&self, i: &[u32]) -> Result<Vec<(&Index, &Rational)>, StratnetError> {
        let p = self.pos(i)?;
        Ok(self.below[p].iter().map(|(l, d)| (&self.strata[*l].index, d)).collect())
    }

    /// Whether a saturated chain runs from `upper` down to `lower`.
    pub fn reaches(&self, upper: &[u32], lower: &[u32]) -> Result<bool, StratnetError> {
        let (u, l) = (self.pos(upper)?, self.pos(lower)?);
        Ok(self.reach[u].contains_key(&l))
    }

    fn pos(&self, i: &[u32]) -> Result<usize, StratnetError> {
        self.position
            .get(i)
            .copied()
            .ok_or_else(|| StratnetError::UnknownIndex(index_name(i)))
    }

    fn check_contained(&self, upper: &[u32], lower: &[u32]) -> Result<(usize, usize), StratnetError> {
        let (u, l) = (self.pos(upper)?, self.pos(lower)?);
        if !is_subset(lower, upper) {
            return Err(StratnetError::NotContained {
                upper: index_name(upper),
                lower: index_name(lower),
            });
        }
        Ok((u, l))
    }

    /// Number of saturated chains from `k` down to `j`.
    pub fn count_chains(&self, k: &[u32], j: &[u32]) -> Result<u128, StratnetError> {
        let (u, l) = self.check_contained(k, j)?;
        Ok(self.reach[u].get(&l).map_or(0, |r| r.chains))
    }

    /// `[Y_K → Y_J]`: chain count times the edge product along one chain.
    pub fn total_degree(&self, k: &[u32], j: &[u32]) -> Result<Rational, StratnetError> {
        let (u, l) = self.check_contained(k, j)?;
        Ok(self.reach[u].get(&l).map_or_else(Rational::zero, |r| {
            Rational::from_integer(r.chains.into()) * &r.product
        }))
    }

    /// Number of rank-`k` indices containing `i` as a set.
    pub fn count_above(&self, i: &[u32], k: usize) -> usize {
        self.level(k).into_iter().filter(|x| is_subset(i, x)).count()
    }

    /// Compares both sides of the chain-count degree ratio for `i ⊆ j ⊆ k`.
    pub fn verify_degree_ratio(
        &self,
        k: &[u32],
        j: &[u32],
        i: &[u32],
    ) -> Result<DegreeRatioReport, StratnetError> {
        self.check_contained(k, j)?;
        self.check_contained(j, i)?;
        let (rk, rj) = (self.rank_of(k)?, self.rank_of(j)?);
        let kj = self.total_degree(k, j)?;
        let ji = self.total_degree(j, i)?;
        let ki = self.total_degree(k, i)?;
        let lhs = (!ki.is_zero()).then(|| &kj * &ji / &ki);
        let num = self.count_above(i, rk);
        let den = self.count_above(j, rk) * self.count_above(i, rj);
        let rhs = Rational::new(num.into(), den.into());
        let holds = lhs.as_ref() == Some(&rhs);
        Ok(DegreeRatioReport {
            upper: k.to_vec(),
            middle: j.to_vec(),
            lower: i.to_vec(),
            lhs,
            rhs,
            holds,
        })
    }

    /// Runs [`Self::verify_degree_ratio`] on every nested triple and keeps the failures.
    pub fn degree_ratio_sweep(&self) -> DegreeRatioSweep {
        let mut checked = 0;
        let mut failures = Vec::new();
        for k in &self.strata {
            for j in &self.strata {
                if !is_subset(&j.index, &k.index) {
                    continue;
                }
                for i in &self.strata {
                    if !is_subset(&i.index, &j.index) {
                        continue;
                    }
                    checked += 1;
                    let r = self
                        .verify_degree_ratio(&k.index, &j.index, &i.index)
                        .expect("nested triple");
                    if !r.holds {
                        failures.push(r);
                    }
                }
            }
        }
        DegreeRatioSweep { checked, failures }
    }

    /// Checks that counts and degrees between two ranks depend only on the ranks.
    pub fn homogeneity(&self) -> HomogeneityReport {
        let mut violations = Vec::new();
        let top = self.top_rank();
        for lo in 0..=top {
            for hi in lo + 1..=top {
                let uppers = self.level(hi);
                let lowers = self.level(lo);
                let ups: Vec<usize> = lowers.iter().map(|i| self.count_above(i, hi)).collect();
                if ups.windows(2).any(|w| w[0] != w[1]) {
                    violations.push(format!("rank-{lo} indices lie under differing numbers of rank-{hi} indices"));
                }
                let downs: Vec<usize> = uppers
                    .iter()
                    .map(|k| lowers.iter().filter(|i| is_subset(i, k)).count())
                    .collect();
                if downs.windows(2).any(|w| w[0] != w[1]) {
                    violations.push(format!("rank-{hi} indices contain differing numbers of rank-{lo} indices"));
                }
                let mut degrees: Vec<Rational> = Vec::new();
                for k in &uppers {
                    for i in lowers.iter().filter(|i| is_subset(i, k)) {
                        degrees.push(self.total_degree(k, i).expect("nested pair"));
                    }
                }
                if degrees.windows(2).any(|w| w[0] != w[1]) {
                    violations.push(format!("degrees from rank {hi} to rank {lo} are not constant"));
                }
                for mid in lo + 1..hi {
                    let mut sizes = Vec::new();
                    for k in &uppers {
                        for i in lowers.iter().filter(|i| is_subset(i, k)) {
                            let between = self
                                .level(mid)
                                .into_iter()
                                .filter(|j| is_subset(i, j) && is_subset(j, k))
                                .count();
                            sizes.push(between);
                        }
                    }
                    if sizes.windows(2).any(|w| w[0] != w[1]) {
                        violations.push(format!(
                            "intervals from rank {hi} to rank {lo} meet rank {mid} in differing numbers"
                        ));
                    }
                }
            }
        }
        HomogeneityReport {
            homogeneous: violations.is_empty(),
            violations,
        }
    }
}

impl fmt::Display for StratumNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (rank, level) in self.by_rank.iter().enumerate() {
            let names: Vec<String> = level.iter().map(|&i| index_name(&self.strata[i].index)).collect();
            writeln!(f, "P{rank}: {}", names.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeRatioReport {
    pub upper: Index,
    pub middle: Index,
    pub lower: Index,
    /// `None` when `[Y_K → Y_I]` vanishes because no chain connects them.
    #[serde(serialize_with = "ser_opt_rat")]
    pub lhs: Option<Rational>,
    #[serde(serialize_with = "ser_rat")]
    pub rhs: Rational,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeRatioSweep {
    pub checked: usize,
    pub failures: Vec<DegreeRatioReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomogeneityReport {
    pub homogeneous: bool,
    pub violations: Vec<String>,
}

pub(crate) fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub(crate) fn ser_opt_rat<S: serde::Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gring::{int, rat};

    fn unit_boolean(n: u32) -> StratumNetwork {
        StratumNetwork::boolean_lattice(n, int(1)).unwrap()
    }

    /// Enumerates saturated chains by explicit depth-first search.
    fn brute_chains(net: &StratumNetwork, k: &[u32], j: &[u32]) -> Vec<Vec<Index>> {
        if k == j {
            return vec![vec![k.to_vec()]];
        }
        let mut out = Vec::new();
        for (lower, _) in net.covers_below(k).unwrap() {
            for mut tail in brute_chains(net, lower, j) {
                tail.insert(0, k.to_vec());
                out.push(tail);
            }
        }
        out
    }

    #[test]
    fn chain_counts() {
        let net = unit_boolean(3);
        assert_eq!(net.count_chains(&[1, 2], &[1, 2]).unwrap(), 1);
        assert_eq!(net.count_chains(&[1, 2, 3], &[]).unwrap(), 6);
        assert!(matches!(
            net.count_chains(&[1, 2], &[3]),
            Err(StratnetError::NotContained { .. })
        ));
        let missing = StratumNetwork::new(
            vec![(vec![], 0), (vec![1], 1), (vec![1, 2], 2)],
            vec![(vec![1], vec![], int(1)), (vec![1, 2], vec![1], int(1))],
        )
        .unwrap();
        assert_eq!(missing.count_chains(&[1, 2], &[]).unwrap(), 1);
        assert_eq!(brute_chains(&missing, &[1, 2], &[]).len(), 1);
    }

    #[test]
    fn chain_recursion_matches_enumeration() {
        let net = StratumNetwork::down_closure(&[vec![1, 2, 3], vec![2, 4], vec![3, 4, 5]], int(1)).unwrap();
        for k in net.strata() {
            for j in net.strata() {
                if !is_subset(&j.index, &k.index) {
                    continue;
                }
                let n = net.count_chains(&k.index, &j.index).unwrap();
                assert_eq!(n as usize, brute_chains(&net, &k.index, &j.index).len());
                if k.index != j.index {
                    let via: u128 = net
                        .covers_below(&k.index)
                        .unwrap()
                        .into_iter()
                        .filter(|(x, _)| is_subset(&j.index, x))
                        .map(|(x, _)| net.count_chains(x, &j.index).unwrap())
                        .sum();
                    assert_eq!(n, via);
                }
            }
        }
    }

    #[test]
    fn degrees_along_chains() {
        let net = unit_boolean(3);
        assert_eq!(net.total_degree(&[2], &[2]).unwrap(), int(1));
        assert_eq!(net.total_degree(&[1, 2], &[]).unwrap(), int(2));
        let doubled = StratumNetwork::boolean_lattice(2, int(2)).unwrap();
        let by_chains: Rational = brute_chains(&doubled, &[1, 2], &[])
            .iter()
            .map(|c| int(2).pow(c.len() as i32 - 1))
            .sum();
        assert_eq!(by_chains, int(8));
        assert_eq!(doubled.total_degree(&[1, 2], &[]).unwrap(), int(8));
    }

    #[test]
    fn rejects_malformed_networks() {
        let no_bottom = StratumNetwork::new(vec![(vec![1], 1)], vec![]);
        assert!(matches!(no_bottom, Err(StratnetError::Bottom(_))));
        let bad_rank = StratumNetwork::new(
            vec![(vec![], 0), (vec![1, 2], 2)],
            vec![(vec![1, 2], vec![], int(1))],
        );
        assert!(matches!(bad_rank, Err(StratnetError::BadCover { .. })));
        let dangling = StratumNetwork::new(vec![(vec![], 0), (vec![1], 1)], vec![]);
        assert!(matches!(dangling, Err(StratnetError::Dangling(_))));
        let twice = StratumNetwork::new(vec![(vec![], 0), (vec![1], 1), (vec![1], 1)], vec![]);
        assert!(matches!(twice, Err(StratnetError::DuplicateStratum(_))));
    }

    #[test]
    fn chain_product_conflict_names_both_chains() {
        let err = StratumNetwork::new(
            vec![(vec![], 0), (vec![1], 1), (vec![2], 1), (vec![1, 2], 2)],
            vec![
                (vec![1], vec![], int(1)),
                (vec![2], vec![], int(1)),
                (vec![1, 2], vec![1], int(1)),
                (vec![1, 2], vec![2], int(3)),
            ],
        )
        .unwrap_err();
        let text = err.to_string();
        assert!(text.contains("{1,2} > {1} > {}"), "{text}");
        assert!(text.contains("{1,2} > {2} > {}"), "{text}");
    }

    #[test]
    fn degree_ratio_holds_on_boolean_lattices() {
        let net = unit_boolean(3);
        let r = net.verify_degree_ratio(&[1, 2, 3], &[1, 2], &[]).unwrap();
        assert_eq!(r.lhs, Some(rat(1, 3)));
        assert_eq!(r.rhs, rat(1, 3));
        assert!(r.holds);
        let same = net.verify_degree_ratio(&[2], &[2], &[2]).unwrap();
        assert!(same.holds && same.rhs == int(1));
        for n in 1..=4 {
            let sweep = StratumNetwork::boolean_lattice(n, int(2)).unwrap().degree_ratio_sweep();
            assert!(sweep.failures.is_empty());
        }
    }

    #[test]
    fn degree_ratio_counterexample() {
        // {2,3} missing: chains from the top reach {1} twice but {} four times.
        let net = StratumNetwork::new(
            vec![
                (vec![], 0),
                (vec![1], 1),
                (vec![2], 1),
                (vec![3], 1),
                (vec![1, 2], 2),
                (vec![1, 3], 2),
                (vec![1, 2, 3], 3),
            ],
            vec![
                (vec![1], vec![], int(1)),
                (vec![2], vec![], int(1)),
                (vec![3], vec![], int(1)),
                (vec![1, 2], vec![1], int(1)),
                (vec![1, 2], vec![2], int(1)),
                (vec![1, 3], vec![1], int(1)),
                (vec![1, 3], vec![3], int(1)),
                (vec![1, 2, 3], vec![1, 2], int(1)),
                (vec![1, 2, 3], vec![1, 3], int(1)),
            ],
        )
        .unwrap();
        let r = net.verify_degree_ratio(&[1, 2, 3], &[1], &[]).unwrap();
        assert_eq!(r.lhs, Some(rat(1, 2)));
        assert_eq!(r.rhs, rat(1, 3));
        assert!(!r.holds);
        assert!(!net.homogeneity().homogeneous);
    }

    #[test]
    fn complete_bipartite_two_ranks() {
        // Every rank-2 index covers every rank-1 index it contains.
        let net = StratumNetwork::down_closure(&[vec![1, 2], vec![1, 3], vec![2, 3]], int(1)).unwrap();
        assert!(net.homogeneity().homogeneous);
        for k in net.level(2) {
            for j in net.level(1).into_iter().filter(|j| is_subset(j, k)) {
                let r = net.verify_degree_ratio(k, j, &[]).unwrap();
                let lhs = Rational::from_integer(
                    (brute_chains(&net, k, j).len() * brute_chains(&net, j, &[]).len()).into(),
                ) / Rational::from_integer(brute_chains(&net, k, &[]).len().into());
                assert_eq!(r.lhs, Some(lhs));
                assert!(r.holds);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let net = StratumNetwork::boolean_lattice(2, rat(3, 2)).unwrap();
        let json = net.to_json();
        let text = serde_json::to_string(&json).unwrap();
        let back: NetworkJson = serde_json::from_str(&text).unwrap();
        let again = StratumNetwork::from_json(&back).unwrap();
        assert_eq!(again.to_json(), json);
        let bad = r#"{"strata":[{"index":[],"rank":0}],"covers":[],"extra":1}"#;
        assert!(serde_json::from_str::<NetworkJson>(bad).is_err());
    }
}
