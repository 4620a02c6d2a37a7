//! Chow data over a network: the twisted product and the decomposition of
//! classes on the cover into stratum contributions.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{index_name, Index, StratnetError, StratumNetwork};
use crate::gring::{GradedPoly, Rational, RingSpec, Substitution};
use crate::linalg::Matrix;

fn union(a: &[u32], b: &[u32]) -> Index {
    let mut u: Index = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

fn intersection(a: &[u32], b: &[u32]) -> Index {
    a.iter().copied().filter(|x| b.contains(x)).collect()
}

/// Rings at each index, Gysin pullbacks between them and the normal classes
/// entering the product.
#[derive(Clone, Debug, Default)]
pub struct ProductData {
    rings: BTreeMap<Index, RingSpec>,
    gysin: BTreeMap<(Index, Index), Substitution>,
    normal: BTreeMap<(Index, Index), GradedPoly>,
}

impl ProductData {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_ring(mut self, i: Index, ring: RingSpec) -> Self {
        self.rings.insert(i, ring);
        self
    }

    /// Pullback from the ring at `from` to the ring at `to ⊇ from`.
    pub fn with_gysin(mut self, from: Index, to: Index, map: Substitution) -> Self {
        self.gysin.insert((from, to), map);
        self
    }

    /// `c_top` of the normal bundle of the `lower` stratum, pulled back to `upper`.
    pub fn with_normal_class(mut self, lower: Index, upper: Index, class: GradedPoly) -> Self {
        self.normal.insert((lower, upper), class);
        self
    }

    pub fn ring(&self, i: &[u32]) -> Result<&RingSpec, StratnetError> {
        self.rings
            .get(i)
            .ok_or_else(|| StratnetError::MissingRing(index_name(i)))
    }

    fn pull(&self, from: &[u32], to: &[u32], class: &GradedPoly) -> Result<GradedPoly, StratnetError> {
        if from == to {
            return Ok(class.clone());
        }
        let map = self
            .gysin
            .get(&(from.to_vec(), to.to_vec()))
            .ok_or_else(|| StratnetError::MissingGysin {
                from: index_name(from),
                to: index_name(to),
            })?;
        Ok(map.apply(class)?)
    }
}

/// `α ·_r β = φ̄*(α) · φ̄*(β) · c_top(N)` in the ring at `I ∪ J`.
pub fn network_product(
    data: &ProductData,
    (i, alpha): (&[u32], &GradedPoly),
    (j, beta): (&[u32], &GradedPoly),
) -> Result<(Index, GradedPoly), StratnetError> {
    let top = union(i, j);
    let meet = intersection(i, j);
    let ring = data.ring(&top)?;
    let a = data.pull(i, &top, alpha)?;
    let b = data.pull(j, &top, beta)?;
    let n = data
        .normal
        .get(&(meet.clone(), top.clone()))
        .ok_or_else(|| StratnetError::MissingNormalClass {
            lower: index_name(&meet),
            upper: index_name(&top),
        })?;
    let prod = a.checked_mul(&b)?.checked_mul(n)?;
    Ok((top, ring.normal_form(&prod)?))
}

/// Linear models at one index: the base stratum `Y_I`, its lift `Y′_I` and
/// the common open part `U_I`, with the pullback and both restrictions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratumSpaces {
    pub pullback: Matrix,
    pub restrict_lifted: Matrix,
    pub restrict_base: Matrix,
}

impl StratumSpaces {
    pub fn base_dim(&self) -> usize {
        self.pullback.cols()
    }

    pub fn lifted_dim(&self) -> usize {
        self.pullback.rows()
    }

    pub fn open_dim(&self) -> usize {
        self.restrict_lifted.rows()
    }
}

/// Pushforwards along one cover, on the lifted and on the base side.
#[derive(Clone, Debug, PartialEq, Eq)]
struct CoverMaps {
    lifted: Matrix,
    base: Matrix,
}

/// One stratum contribution `α_I` in the decomposition of a lifted class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionTerm {
    pub index: Index,
    pub class: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceJson {
    pub index: Vec<u32>,
    pub base_dim: usize,
    pub lifted_dim: usize,
    pub open_dim: usize,
    pub pullback: Vec<Vec<String>>,
    pub restrict_lifted: Vec<Vec<String>>,
    pub restrict_base: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverMapsJson {
    pub upper: Vec<u32>,
    pub lower: Vec<u32>,
    pub lifted: Vec<Vec<String>>,
    pub base: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassJson {
    pub index: Vec<u32>,
    pub class: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionJson {
    pub spaces: Vec<SpaceJson>,
    pub pushforwards: Vec<CoverMapsJson>,
    /// Lifted classes to decompose, used by the batch front-end.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<ClassJson>,
}

/// Finite-dimensional models of the open/closed sequences
/// `⊕_k A(Y_{J∪k}) → A(Y_J) → A(U_J) → 0` and their lifts, one per index.
#[derive(Clone, Debug)]
pub struct DecompositionData {
    net: StratumNetwork,
    spaces: BTreeMap<Index, StratumSpaces>,
    covers: BTreeMap<(Index, Index), CoverMaps>,
}

impl DecompositionData {
    /// Validates shapes, commutativity and exactness of every sequence.
    pub fn new(
        net: StratumNetwork,
        spaces: BTreeMap<Index, StratumSpaces>,
        covers: Vec<(Index, Index, Matrix, Matrix)>,
    ) -> Result<Self, StratnetError> {
        let mut cover_maps = BTreeMap::new();
        for (upper, lower, lifted, base) in covers {
            if !net.covers_below(&upper)?.iter().any(|(l, _)| **l == lower) {
                return Err(StratnetError::Exactness {
                    index: index_name(&lower),
                    reason: format!("{} is not a cover of it", index_name(&upper)),
                });
            }
            cover_maps.insert((upper, lower), CoverMaps { lifted, base });
        }
        let data = DecompositionData {
            net,
            spaces,
            covers: cover_maps,
        };
        for s in data.net.strata() {
            data.validate_at(&s.index)?;
        }
        data.validate_composites()?;
        Ok(data)
    }

    pub fn network(&self) -> &StratumNetwork {
        &self.net
    }

    pub fn spaces(&self, i: &[u32]) -> Result<&StratumSpaces, StratnetError> {
        self.spaces
            .get(i)
            .ok_or_else(|| StratnetError::MissingSpaces(index_name(i)))
    }

    fn cover(&self, upper: &[u32], lower: &[u32]) -> Result<&CoverMaps, StratnetError> {
        self.covers
            .get(&(upper.to_vec(), lower.to_vec()))
            .ok_or_else(|| StratnetError::MissingCoverMaps {
                upper: index_name(upper),
                lower: index_name(lower),
            })
    }

    fn uppers(&self, i: &[u32]) -> Vec<Index> {
        self.net
            .covers_above(i)
            .expect("known index")
            .into_iter()
            .map(|(u, _)| u.clone())
            .collect()
    }

    fn validate_at(&self, i: &[u32]) -> Result<(), StratnetError> {
        let fail = |reason: String| StratnetError::Exactness {
            index: index_name(i),
            reason,
        };
        let sp = self.spaces(i)?;
        let (b, l, o) = (sp.base_dim(), sp.lifted_dim(), sp.open_dim());
        if sp.restrict_lifted.cols() != l || sp.restrict_base.rows() != o || sp.restrict_base.cols() != b {
            return Err(fail("matrix shapes disagree with the declared dimensions".into()));
        }
        if sp.restrict_lifted.mul(&sp.pullback) != sp.restrict_base {
            return Err(fail("restriction after pullback differs from the base restriction".into()));
        }
        if sp.restrict_lifted.rank() != o || sp.restrict_base.rank() != o {
            return Err(fail("restriction to the open part is not surjective".into()));
        }
        let uppers = self.uppers(i);
        let mut lifted_blocks = Vec::new();
        let mut base_blocks = Vec::new();
        for u in &uppers {
            let c = self.cover(u, i)?;
            let up = self.spaces(u)?;
            if c.lifted.rows() != l
                || c.lifted.cols() != up.lifted_dim()
                || c.base.rows() != b
                || c.base.cols() != up.base_dim()
            {
                return Err(fail(format!("pushforward from {} has the wrong shape", index_name(u))));
            }
            if !sp.restrict_lifted.mul(&c.lifted).is_zero() || !sp.restrict_base.mul(&c.base).is_zero() {
                return Err(fail(format!(
                    "pushforward from {} followed by restriction is nonzero",
                    index_name(u)
                )));
            }
            if c.lifted.mul(&up.pullback) != sp.pullback.mul(&c.base) {
                return Err(fail(format!(
                    "pushforward from {} does not commute with pullback",
                    index_name(u)
                )));
            }
            lifted_blocks.push(&c.lifted);
            base_blocks.push(&c.base);
        }
        let lifted_image = Matrix::hconcat(&lifted_blocks, l).rank();
        let base_image = Matrix::hconcat(&base_blocks, b).rank();
        if lifted_image != l - o || base_image != b - o {
            return Err(fail(format!(
                "image of the pushforwards has rank {lifted_image} (lifted) and {base_image} (base), kernels have rank {} and {}",
                l - o,
                b - o
            )));
        }
        Ok(())
    }

    /// Composite base pushforwards must not depend on the chain taken.
    fn validate_composites(&self) -> Result<(), StratnetError> {
        for s in self.net.strata() {
            let mut seen: BTreeMap<Index, Matrix> = BTreeMap::new();
            seen.insert(s.index.clone(), Matrix::identity(self.spaces(&s.index)?.base_dim()));
            let mut frontier = vec![s.index.clone()];
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for lo in &frontier {
                    let from_lo = seen[lo].clone();
                    for up in self.uppers(lo) {
                        let m = from_lo.mul(&self.cover(&up, lo)?.base);
                        match seen.get(&up) {
                            Some(prev) if *prev != m => {
                                return Err(StratnetError::Exactness {
                                    index: index_name(&s.index),
                                    reason: format!(
                                        "pushforward from {} depends on the chain",
                                        index_name(&up)
                                    ),
                                });
                            }
                            Some(_) => {}
                            None => {
                                seen.insert(up.clone(), m);
                                next.push(up);
                            }
                        }
                    }
                }
                frontier = next;
            }
        }
        Ok(())
    }

    /// Base pushforward `A(Y_upper) → A(Y_lower)` along the first chain.
    pub fn base_pushforward(&self, upper: &[u32], lower: &[u32]) -> Result<Matrix, StratnetError> {
        if upper == lower {
            return Ok(Matrix::identity(self.spaces(lower)?.base_dim()));
        }
        for (mid, _) in self.net.covers_below(upper)? {
            if self.net.reaches(mid, lower)? {
                let rest = self.base_pushforward(mid, lower)?;
                return Ok(rest.mul(&self.cover(upper, mid)?.base));
            }
        }
        Err(StratnetError::NotContained {
            upper: index_name(upper),
            lower: index_name(lower),
        })
    }

    fn check_length(&self, i: &[u32], v: &[Rational], lifted: bool) -> Result<(), StratnetError> {
        let sp = self.spaces(i)?;
        let expected = if lifted { sp.lifted_dim() } else { sp.base_dim() };
        if v.len() != expected {
            return Err(StratnetError::ClassLength {
                index: index_name(i),
                found: v.len(),
                expected,
            });
        }
        Ok(())
    }

    /// Peels a class on the lift of `Y_j` into contributions `α_I`, `I ⊇ j`.
    ///
    /// Indices are visited outward from `j`, by increasing rank and then
    /// lexicographically: each contribution is the canonical solution of the
    /// open-part restriction, and the remainder is spread over the covers
    /// above by the canonical solution of the pushforward system.
    pub fn decompose(&self, j: &[u32], alpha: &[Rational]) -> Result<Vec<DecompositionTerm>, StratnetError> {
        self.check_length(j, alpha, true)?;
        let start = self.net.rank_of(j)?;
        let mut pending: BTreeMap<Index, Vec<Rational>> = BTreeMap::new();
        pending.insert(j.to_vec(), alpha.to_vec());
        let mut terms = Vec::new();
        for s in self.net.strata().iter().filter(|s| s.rank >= start) {
            let Some(v) = pending.remove(&s.index) else {
                continue;
            };
            let i = &s.index;
            let sp = self.spaces(i)?;
            let open = sp.restrict_lifted.apply(&v);
            let a = sp.restrict_base.solve(&open).ok_or_else(|| StratnetError::Exactness {
                index: index_name(i),
                reason: "open part is not reached from the base".into(),
            })?;
            let lifted_a = sp.pullback.apply(&a);
            let rest: Vec<Rational> = v.iter().zip(&lifted_a).map(|(x, y)| x - y).collect();
            if a.iter().any(|x| !x.is_zero()) {
                terms.push(DecompositionTerm {
                    index: i.clone(),
                    class: a,
                });
            }
            if rest.iter().all(Zero::is_zero) {
                continue;
            }
            let uppers = self.uppers(i);
            let blocks: Vec<&Matrix> = uppers
                .iter()
                .map(|u| self.cover(u, i).map(|c| &c.lifted))
                .collect::<Result<_, _>>()?;
            let system = Matrix::hconcat(&blocks, sp.lifted_dim());
            let y = system.solve(&rest).ok_or_else(|| StratnetError::Exactness {
                index: index_name(i),
                reason: "remainder is not a pushforward from deeper strata".into(),
            })?;
            let mut offset = 0;
            for (u, block) in uppers.iter().zip(&blocks) {
                let part = &y[offset..offset + block.cols()];
                offset += block.cols();
                if part.iter().all(Zero::is_zero) {
                    continue;
                }
                let slot = pending
                    .entry(u.clone())
                    .or_insert_with(|| vec![Rational::zero(); part.len()]);
                for (acc, x) in slot.iter_mut().zip(part) {
                    *acc += x;
                }
            }
        }
        Ok(terms)
    }

    /// `Σ_I p*_j φ^I_{j*} α_I`.
    pub fn recompose(&self, j: &[u32], terms: &[DecompositionTerm]) -> Result<Vec<Rational>, StratnetError> {
        let sp = self.spaces(j)?;
        let mut base = vec![Rational::zero(); sp.base_dim()];
        for t in terms {
            self.check_length(&t.index, &t.class, false)?;
            let pushed = self.base_pushforward(&t.index, j)?.apply(&t.class);
            for (acc, x) in base.iter_mut().zip(pushed) {
                *acc += x;
            }
        }
        Ok(sp.pullback.apply(&base))
    }

    pub fn from_json(net: StratumNetwork, json: &DecompositionJson) -> Result<Self, StratnetError> {
        let mut spaces = BTreeMap::new();
        for s in &json.spaces {
            let mut idx = s.index.clone();
            idx.sort_unstable();
            let sp = StratumSpaces {
                pullback: Matrix::from_strings(&s.pullback, s.lifted_dim, s.base_dim)?,
                restrict_lifted: Matrix::from_strings(&s.restrict_lifted, s.open_dim, s.lifted_dim)?,
                restrict_base: Matrix::from_strings(&s.restrict_base, s.open_dim, s.base_dim)?,
            };
            spaces.insert(idx, sp);
        }
        let mut covers = Vec::new();
        for c in &json.pushforwards {
            let (mut upper, mut lower) = (c.upper.clone(), c.lower.clone());
            upper.sort_unstable();
            lower.sort_unstable();
            let up = spaces
                .get(&upper)
                .ok_or_else(|| StratnetError::MissingSpaces(index_name(&upper)))?;
            let lo = spaces
                .get(&lower)
                .ok_or_else(|| StratnetError::MissingSpaces(index_name(&lower)))?;
            let lifted = Matrix::from_strings(&c.lifted, lo.lifted_dim(), up.lifted_dim())?;
            let base = Matrix::from_strings(&c.base, lo.base_dim(), up.base_dim())?;
            covers.push((upper, lower, lifted, base));
        }
        Self::new(net, spaces, covers)
    }

    pub fn to_json(&self) -> DecompositionJson {
        let spaces = self
            .spaces
            .iter()
            .map(|(i, s)| SpaceJson {
                index: i.clone(),
                base_dim: s.base_dim(),
                lifted_dim: s.lifted_dim(),
                open_dim: s.open_dim(),
                pullback: s.pullback.to_strings(),
                restrict_lifted: s.restrict_lifted.to_strings(),
                restrict_base: s.restrict_base.to_strings(),
            })
            .collect();
        let pushforwards = self
            .covers
            .iter()
            .map(|((u, l), c)| CoverMapsJson {
                upper: u.clone(),
                lower: l.clone(),
                lifted: c.lifted.to_strings(),
                base: c.base.to_strings(),
            })
            .collect();
        DecompositionJson {
            spaces,
            pushforwards,
            classes: Vec::new(),
        }
    }
}
