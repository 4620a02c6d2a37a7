//! Total Chern classes of weighted projective fibrations and weighted
//! blow-ups.
//!
//! A weighted normal bundle is described blockwise: each [`Block`] is a
//! graded piece `Q_n` of rank `k_n` on which the torus acts with weight
//! `w_n`, given by its total Chern class `p(Q_n)` (and optionally its Chern
//! roots). Twisting a block by a line class `s` with weight `w` produces
//! `∏_i (1 + a_i + w·s)`; without roots this is evaluated through
//! `c_j(Q ⊗ M) = Σ_i C(k−i, j−i) c_i(Q) c_1(M)^{j−i}`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gring::{
    GradedPoly, GringError, Monomial, PolyJson, Rational, RingSpec, Rule, Substitution, Universe,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WblowError {
    #[error(transparent)]
    Ring(#[from] GringError),
    #[error("block {block}: {reason}")]
    InvalidBlock { block: usize, reason: String },
    #[error("block weights must be strictly increasing (block {0})")]
    WeightsNotIncreasing(usize),
    #[error("twisting class must be homogeneous of degree 1")]
    TwistNotDegreeOne,
}

/// One graded piece of the weighted normal bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub weight: u32,
    pub rank: u32,
    pub total_class: GradedPoly,
    pub roots: Option<Vec<GradedPoly>>,
}

impl Block {
    /// A block with trivial total class `1`.
    pub fn trivial(universe: &Arc<Universe>, cap: u32, weight: u32, rank: u32) -> Self {
        Block {
            weight,
            rank,
            total_class: GradedPoly::one(universe, cap),
            roots: None,
        }
    }

    /// A block given by its Chern roots; the total class is their product.
    pub fn from_roots(weight: u32, roots: Vec<GradedPoly>) -> Result<Self, WblowError> {
        let first = roots.first().ok_or(WblowError::InvalidBlock {
            block: 0,
            reason: "no roots".into(),
        })?;
        let one = GradedPoly::one(first.universe(), first.cap());
        let mut total = one.clone();
        for r in &roots {
            total = total.checked_mul(&one.checked_add(r)?)?;
        }
        Ok(Block {
            weight,
            rank: roots.len() as u32,
            total_class: total,
            roots: Some(roots),
        })
    }
}

/// The blocks `Q_1, …, Q_l` of a weighted normal bundle, in increasing weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedBundleData {
    blocks: Vec<Block>,
}

impl WeightedBundleData {
    pub fn new(blocks: Vec<Block>) -> Result<Self, WblowError> {
        for (n, b) in blocks.iter().enumerate() {
            let bad = |reason: String| WblowError::InvalidBlock { block: n, reason };
            if b.weight == 0 {
                return Err(bad("weight must be positive".into()));
            }
            if b.rank == 0 {
                return Err(bad("rank must be positive".into()));
            }
            if n > 0 && blocks[n - 1].weight >= b.weight {
                return Err(WblowError::WeightsNotIncreasing(n));
            }
            if !b.total_class.constant_term().is_one() {
                return Err(bad("total class must have constant term 1".into()));
            }
            if b.total_class.top_degree().is_some_and(|t| t > b.rank) {
                return Err(bad(format!("total class has terms above degree {}", b.rank)));
            }
            if let Some(roots) = &b.roots {
                if roots.len() != b.rank as usize {
                    return Err(bad(format!("{} roots for rank {}", roots.len(), b.rank)));
                }
                let one = GradedPoly::one(b.total_class.universe(), b.total_class.cap());
                let mut prod = one.clone();
                for r in roots {
                    if !r.is_homogeneous_of(1) {
                        return Err(bad("roots must be homogeneous of degree 1".into()));
                    }
                    prod = prod.checked_mul(&one.checked_add(r)?)?;
                }
                if prod != b.total_class {
                    return Err(bad("product of roots differs from total class".into()));
                }
            }
            if n > 0 {
                blocks[0].total_class.check_compatible(&b.total_class)?;
            }
        }
        Ok(WeightedBundleData { blocks })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Total rank `Σ k_n`.
    pub fn rank(&self) -> u32 {
        self.blocks.iter().map(|b| b.rank).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn from_json(
        universe: &Arc<Universe>,
        cap: u32,
        json: &BundleJson,
    ) -> Result<Self, WblowError> {
        let blocks = json
            .blocks
            .iter()
            .map(|b| {
                Ok(Block {
                    weight: b.weight,
                    rank: b.rank,
                    total_class: GradedPoly::from_json(universe, Some(cap), &b.total_class)?,
                    roots: b
                        .roots
                        .as_ref()
                        .map(|rs| {
                            rs.iter()
                                .map(|r| GradedPoly::from_json(universe, Some(cap), r))
                                .collect::<Result<Vec<_>, _>>()
                        })
                        .transpose()?,
                })
            })
            .collect::<Result<Vec<_>, WblowError>>()?;
        Self::new(blocks)
    }

    pub fn to_json(&self) -> BundleJson {
        BundleJson {
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockJson {
                    weight: b.weight,
                    rank: b.rank,
                    total_class: b.total_class.to_json(),
                    roots: b.roots.as_ref().map(|rs| rs.iter().map(GradedPoly::to_json).collect()),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockJson {
    pub weight: u32,
    pub rank: u32,
    pub total_class: PolyJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<PolyJson>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleJson {
    pub blocks: Vec<BlockJson>,
}

fn binomial(n: u32, k: u32) -> Rational {
    if k > n {
        return Rational::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::from_integer(acc)
}

/// `c(Q ⊗ M)` for a rank-`rank` class `p = c(Q)` and `c_1(M) = weight·s`,
/// computed from the Chern classes of `Q` without roots.
pub fn twist_class(
    p: &GradedPoly,
    rank: u32,
    weight: i64,
    s: &GradedPoly,
) -> Result<GradedPoly, WblowError> {
    p.check_compatible(s)?;
    if !s.is_homogeneous_of(1) {
        return Err(WblowError::TwistNotDegreeOne);
    }
    let cap = p.cap();
    let x = s.scale(&Rational::from_integer(weight.into()));
    let powers: Vec<GradedPoly> = {
        let mut v = vec![GradedPoly::one(p.universe(), cap)];
        for j in 1..=rank.min(cap) {
            v.push(v[j as usize - 1].checked_mul(&x)?);
        }
        v
    };
    let chern: Vec<GradedPoly> = (0..=rank.min(cap))
        .map(|i| p.degree_part(i))
        .collect::<Result<_, _>>()?;
    let mut out = GradedPoly::zero(p.universe(), cap);
    for j in 0..=rank.min(cap) {
        for i in 0..=j {
            if chern[i as usize].is_zero() {
                continue;
            }
            let term = chern[i as usize]
                .checked_mul(&powers[(j - i) as usize])?
                .scale(&binomial(rank - i, j - i));
            out = out.checked_add(&term)?;
        }
    }
    Ok(out)
}

/// `∏_i (1 + a_i + weight·s)` from explicit Chern roots.
pub fn twist_roots(
    roots: &[GradedPoly],
    weight: i64,
    s: &GradedPoly,
) -> Result<GradedPoly, WblowError> {
    if !s.is_homogeneous_of(1) {
        return Err(WblowError::TwistNotDegreeOne);
    }
    let one = GradedPoly::one(s.universe(), s.cap());
    let ws = s.scale(&Rational::from_integer(weight.into()));
    let mut out = one.clone();
    for a in roots {
        out = out.checked_mul(&one.checked_add(a)?.checked_add(&ws)?)?;
    }
    Ok(out)
}

fn twisted_product(data: &WeightedBundleData, sign: i64, s: &GradedPoly) -> Result<GradedPoly, WblowError> {
    let mut out = GradedPoly::one(s.universe(), s.cap());
    for b in data.blocks() {
        let t = twist_class(&b.total_class, b.rank, sign * b.weight as i64, s)?;
        out = out.checked_mul(&t)?;
    }
    Ok(out)
}

/// `c(T_{P|Y}) = ∏_n c(Q_n ⊗ L^{w_n})`, the middle term of the weighted
/// Euler sequence, with `tau = c_1(O_P(1))`.
pub fn relative_tangent_chern(data: &WeightedBundleData, tau: &GradedPoly) -> Result<GradedPoly, WblowError> {
    twisted_product(data, 1, tau)
}

/// `c(P) = p*c(Y) · ∏_n c(Q_n ⊗ L^{w_n})` for the weighted projective
/// fibration `P → Y`.
pub fn fibration_chern(
    base_class: &GradedPoly,
    data: &WeightedBundleData,
    tau: &GradedPoly,
) -> Result<GradedPoly, WblowError> {
    Ok(base_class.checked_mul(&relative_tangent_chern(data, tau)?)?)
}

/// `c(X̃) = f*c(X) · (1+E) · ∏_n p(Q_n(−w_n E)) / ∏_n p(Q_n)` for the
/// weighted blow-up along a center with weighted normal bundle `data`.
pub fn blowup_chern(
    base_class: &GradedPoly,
    data: &WeightedBundleData,
    e: &GradedPoly,
) -> Result<GradedPoly, WblowError> {
    let one = GradedPoly::one(e.universe(), e.cap());
    let mut out = base_class.checked_mul(&one.checked_add(e)?)?;
    out = out.checked_mul(&twisted_product(data, -1, e)?)?;
    for b in data.blocks() {
        out = out.checked_mul(&b.total_class.inv_unit()?)?;
    }
    Ok(out)
}

/// Presentation `A*(Y)[τ] / ⟨P(τ)⟩` of the fibration's Chow ring, where
/// `P(t) = ∏_n Σ_j c_j(Q_n)(w_n t)^{k_n−j}` is the top equivariant Chern
/// class. The generator `tau` is appended after the base generators, so
/// `τ^{rank}` leads the relation.
pub fn fibration_ring(
    base: &RingSpec,
    data: &WeightedBundleData,
    tau: &str,
    cap: u32,
) -> Result<RingSpec, WblowError> {
    let mut gens = base.universe().generators().to_vec();
    gens.push(crate::gring::Generator::new(tau, 1));
    let universe = Universe::new(gens)?;
    let lift = Substitution::new(&universe, cap);
    let t = GradedPoly::generator(&universe, cap, tau)?;
    let mut rules = Vec::new();
    for r in base.rules() {
        let lhs_poly = GradedPoly::from_terms(base.universe(), base.cap(), [(r.lhs.clone(), Rational::one())]);
        let lifted_lhs = lift.apply(&lhs_poly)?;
        let Some((lhs, _)) = lifted_lhs.terms().next() else {
            continue;
        };
        rules.push(Rule {
            lhs: lhs.clone(),
            rhs: lift.apply(&r.rhs)?,
        });
    }
    let mut top = GradedPoly::one(&universe, cap);
    let mut lead = Rational::one();
    for b in data.blocks() {
        let p = lift.apply(&b.total_class)?;
        let mut block_top = GradedPoly::zero(&universe, cap);
        let wt = t.scale(&Rational::from_integer(b.weight.into()));
        for j in 0..=b.rank.min(cap) {
            let cj = p.degree_part(j)?;
            if cj.is_zero() {
                continue;
            }
            block_top = block_top.checked_add(&cj.checked_mul(&wt.pow((b.rank - j) as i64)?)?)?;
        }
        top = top.checked_mul(&block_top)?;
        lead *= Rational::from_integer(BigInt::from(b.weight).pow(b.rank));
    }
    let r = data.rank();
    if r <= cap && !data.is_empty() {
        let tau_idx = universe.require(tau)?;
        let lhs = Monomial::from_exponents(&universe, [(tau_idx, r)]);
        let lead_poly = GradedPoly::from_terms(&universe, cap, [(lhs.clone(), lead.clone())]);
        let rhs = top.checked_sub(&lead_poly)?.scale(&-lead.recip());
        rules.push(Rule { lhs, rhs });
    }
    Ok(RingSpec::new(&universe, cap, rules, None)?)
}
