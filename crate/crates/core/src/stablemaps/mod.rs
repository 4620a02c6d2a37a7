//! Total Chern classes along the blow-up tower of genus-zero stable-map
//! spaces `M̄_{0,m}(P^n, d)`.
//!
//! Subsets of the label set `D′ = {1, …, d, m2, …, mm}` are bit masks: bit
//! `i < d` is the degree label `i+1`, bit `d + j` is the marked point
//! `m(j+2)`. The privileged first marked point is not part of `D′`.
//!
//! All classes live in the free truncated ring on `H`, `psi` and one degree-1
//! generator `D{…}` per admissible subset `h` (the boundary divisor `D_h`).

mod curve;

use std::fmt;
use std::sync::Arc;

use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gring::{int, Generator, GradedPoly, GringError, Rational, Universe};
use crate::wblow::{self, Block, WblowError, WeightedBundleData};

pub use curve::{
    BasePoint, Component, CurveModel, CurveReport, CurveViolation, Owner, PartitionBlock, PointMarker,
    TailMarker,
};

/// Default largest degree `d` accepted before the generator budget guard.
pub const DEFAULT_MAX_DEGREE: u32 = 4;
/// Hard limit on `|D′|`, imposed by the mask width and generator indices.
pub const MAX_LABELS: u32 = 15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StableMapsError {
    #[error(transparent)]
    Ring(#[from] GringError),
    #[error(transparent)]
    Bundle(#[from] WblowError),
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("degree {d} exceeds the generator budget ({count} candidate subsets); raise the limit explicitly")]
    GeneratorBudget { d: u32, count: u64 },
    #[error("`{0}` is not a nested set")]
    NotNested(String),
    #[error("subset `{0}` is not admissible")]
    NotAdmissible(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
}

/// The label set `D′` for degree `d` and `m` marked points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MarkSet {
    d: u32,
    m: u32,
}

impl MarkSet {
    pub fn new(d: u32, m: u32) -> Result<Self, StableMapsError> {
        if d == 0 || m == 0 {
            return Err(StableMapsError::Parameters("need d ≥ 1 and m ≥ 1".into()));
        }
        if d + m - 1 > MAX_LABELS {
            return Err(StableMapsError::Parameters(format!(
                "|D′| = {} exceeds {MAX_LABELS}",
                d + m - 1
            )));
        }
        Ok(MarkSet { d, m })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `|D′| = d + m − 1`.
    pub fn size(&self) -> u32 {
        self.d + self.m - 1
    }

    pub fn full(&self) -> u32 {
        (1u32 << self.size()) - 1
    }

    /// Mask of the degree labels `D`.
    pub fn degree_mask(&self) -> u32 {
        (1u32 << self.d) - 1
    }

    /// Mask of the extra marked points `{m2, …, mm}`.
    pub fn marked_mask(&self) -> u32 {
        self.full() & !self.degree_mask()
    }

    /// The singletons `{m2}, …, {mm}`.
    pub fn marked_singletons(&self) -> Vec<u32> {
        (self.d..self.size()).map(|b| 1u32 << b).collect()
    }

    pub fn label(&self, bit: u32) -> String {
        if bit < self.d {
            (bit + 1).to_string()
        } else {
            format!("m{}", bit - self.d + 2)
        }
    }

    pub fn parse_label(&self, s: &str) -> Result<u32, StableMapsError> {
        let bit = match s.strip_prefix('m') {
            Some(rest) => rest
                .parse::<u32>()
                .ok()
                .filter(|&j| j >= 2 && j <= self.m)
                .map(|j| self.d + j - 2),
            None => s.parse::<u32>().ok().filter(|&i| i >= 1 && i <= self.d).map(|i| i - 1),
        };
        bit.ok_or_else(|| StableMapsError::UnknownLabel(s.to_string()))
    }

    pub fn parse_subset<S: AsRef<str>>(&self, labels: &[S]) -> Result<u32, StableMapsError> {
        let mut mask = 0;
        for l in labels {
            mask |= 1 << self.parse_label(l.as_ref())?;
        }
        Ok(mask)
    }

    /// `{1,2,m2}` style rendering.
    pub fn subset_name(&self, h: u32) -> String {
        let parts: Vec<String> = (0..self.size()).filter(|b| h >> b & 1 == 1).map(|b| self.label(b)).collect();
        format!("{{{}}}", parts.join(","))
    }

    pub fn subset_labels(&self, h: u32) -> Vec<String> {
        (0..self.size()).filter(|b| h >> b & 1 == 1).map(|b| self.label(b)).collect()
    }
}

fn card(h: u32) -> u32 {
    h.count_ones()
}

fn is_subset(a: u32, b: u32) -> bool {
    a & !b == 0
}

/// Pairwise condition `h ∩ h′ ∈ {h, h′, ∅}`.
pub fn is_nested(sets: &[u32]) -> bool {
    sets.iter().enumerate().all(|(i, &a)| {
        sets[i + 1..].iter().all(|&b| {
            let c = a & b;
            c == 0 || c == a || c == b
        })
    })
}

/// Which candidate subsets index boundary divisors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    /// Keep `h = D′`. Off by default: the complementary component would
    /// carry only the first marked point and one node, which is unstable.
    pub include_full_set: bool,
}

/// Subsets `h ⊆ D′` with `|h| > k` indexing divisors `D_h` over the stratum
/// `I`: nonempty, not in `I`, not a marked singleton, keeping `I ∪ {h}`
/// nested. Sorted by size, then mask.
pub fn admissible_h(marks: &MarkSet, nested: &[u32], k: u32, rule: Admissibility) -> Vec<u32> {
    let singles = marks.marked_singletons();
    let mut out: Vec<u32> = (1..=marks.full())
        .filter(|&h| card(h) > k)
        .filter(|&h| rule.include_full_set || h != marks.full())
        .filter(|h| !singles.contains(h))
        .filter(|h| !nested.contains(h))
        .filter(|&h| {
            nested.iter().all(|&g| {
                let c = g & h;
                c == 0 || c == g || c == h
            })
        })
        .collect();
    out.sort_by_key(|&h| (card(h), h));
    out
}

/// The ring, stratum and parameters shared by every class computation.
#[derive(Clone, Debug)]
pub struct ClassContext {
    marks: MarkSet,
    n: u32,
    nested: Vec<u32>,
    rule: Admissibility,
    divisors: Vec<u32>,
    universe: Arc<Universe>,
    cap: u32,
    parallel: bool,
}

/// Default truncation: `dim M̄_{0,m}(P^n, d) = nd + d + n + m − 3`.
pub fn ambient_dimension(n: u32, m: u32, d: u32) -> u32 {
    (n * d + d + n + m).saturating_sub(3)
}

impl ClassContext {
    /// Builds the generator set `H, psi, D_h` for every `h` admissible at
    /// threshold 0 over the stratum `nested`.
    pub fn new(
        marks: MarkSet,
        n: u32,
        nested: Vec<u32>,
        cap: u32,
        rule: Admissibility,
    ) -> Result<Self, StableMapsError> {
        if n == 0 {
            return Err(StableMapsError::Parameters("need n ≥ 1".into()));
        }
        for &h in &nested {
            if h == 0 || !is_subset(h, marks.full()) {
                return Err(StableMapsError::NotNested(format!("subset mask {h:#b} outside D′")));
            }
        }
        let mut nested = nested;
        nested.sort_by_key(|&h| (card(h), h));
        nested.dedup();
        if !is_nested(&nested) {
            let names: Vec<String> = nested.iter().map(|&h| marks.subset_name(h)).collect();
            return Err(StableMapsError::NotNested(names.join(" ")));
        }
        let divisors = admissible_h(&marks, &nested, 0, rule);
        let mut gens = vec![Generator::new("H", 1), Generator::new("psi", 1)];
        gens.extend(divisors.iter().map(|&h| Generator::new(format!("D{}", marks.subset_name(h)), 1)));
        let universe = Universe::new(gens)?;
        Ok(ClassContext {
            marks,
            n,
            nested,
            rule,
            divisors,
            universe,
            cap,
            parallel: false,
        })
    }

    /// Context for `M̄_{0,m}(P^n, d)`: the stratum of the marked singletons.
    pub fn for_marked(n: u32, m: u32, d: u32, cap: u32, rule: Admissibility) -> Result<Self, StableMapsError> {
        let marks = MarkSet::new(d, m)?;
        Self::new(marks, n, marks.marked_singletons(), cap, rule)
    }

    /// Evaluate per-subset factors on the rayon pool. Results are multiplied
    /// in canonical subset order either way.
    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn marks(&self) -> &MarkSet {
        &self.marks
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn nested(&self) -> &[u32] {
        &self.nested
    }

    pub fn divisors(&self) -> &[u32] {
        &self.divisors
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn admissibility(&self) -> Admissibility {
        self.rule
    }

    /// Admissible subsets at threshold `k`.
    pub fn admissible(&self, k: u32) -> Vec<u32> {
        self.divisors.iter().copied().filter(|&h| card(h) > k).collect()
    }

    fn one(&self) -> GradedPoly {
        GradedPoly::one(&self.universe, self.cap)
    }

    pub fn h_class(&self) -> GradedPoly {
        GradedPoly::var(&self.universe, self.cap, 0)
    }

    pub fn psi(&self) -> GradedPoly {
        GradedPoly::var(&self.universe, self.cap, 1)
    }

    fn divisor_index(&self, h: u32) -> Option<usize> {
        self.divisors.iter().position(|&g| g == h).map(|p| p + 2)
    }

    /// The boundary divisor `D_h`.
    pub fn divisor(&self, h: u32) -> Result<GradedPoly, StableMapsError> {
        let idx = self
            .divisor_index(h)
            .ok_or_else(|| StableMapsError::NotAdmissible(self.marks.subset_name(h)))?;
        Ok(GradedPoly::var(&self.universe, self.cap, idx))
    }

    pub fn divisor_name(&self, h: u32) -> String {
        format!("D{}", self.marks.subset_name(h))
    }

    /// `l_I = |∪ I|`.
    pub fn union_size(&self) -> u32 {
        card(self.union())
    }

    fn union(&self) -> u32 {
        self.nested.iter().fold(0, |acc, &h| acc | h)
    }

    /// `s_I`, the number of maximal elements of `I`.
    pub fn maximal_count(&self) -> u32 {
        self.nested
            .iter()
            .filter(|&&h| !self.nested.iter().any(|&g| g != h && is_subset(h, g)))
            .count() as u32
    }

    /// `I_h = {h′ ∈ I : h′ ⊊ h}`.
    pub fn contained(&self, h: u32) -> Vec<u32> {
        self.nested.iter().copied().filter(|&g| g != h && is_subset(g, h)).collect()
    }

    /// Number of `j` values in the `h`-factor: `|h ∖ ∪ I_h|`.
    pub fn j_range(&self, h: u32) -> u32 {
        let covered = self.contained(h).into_iter().fold(0, |a, g| a | g);
        card(h & !covered)
    }

    /// Exponent `|I_h| − 1` of the `(1+ψ_h)/(1+ψ_h⁰)` factor.
    pub fn psi_exponent(&self, h: u32) -> i64 {
        self.contained(h).len() as i64 - 1
    }

    fn sum_divisors(&self, h: u32, strict: bool) -> GradedPoly {
        let terms = self
            .divisors
            .iter()
            .filter(|&&g| is_subset(h, g) && (!strict || g != h))
            .map(|&g| {
                let idx = self.divisor_index(g).expect("listed divisor");
                (crate::gring::Monomial::var(idx, 1), Rational::one())
            });
        GradedPoly::from_terms(&self.universe, self.cap, terms)
    }

    /// `(ψ_h, ψ_h⁰) = (ψ − Σ_{h′⊇h} D_{h′}, ψ − Σ_{h′⊋h} D_{h′})`.
    pub fn psi_classes(&self, h: u32) -> Result<(GradedPoly, GradedPoly), StableMapsError> {
        self.divisor(h)?;
        let psi = self.psi();
        Ok((&psi - &self.sum_divisors(h, false), &psi - &self.sum_divisors(h, true)))
    }

    /// `H_{I;h} = H + (|D′| − |h ∪ ∪I|)ψ − Σ_{h′⊋h} |h′ ∖ (h ∪ ∪I)| D_{h′}`.
    pub fn hyperplane_class(&self, h: u32) -> Result<GradedPoly, StableMapsError> {
        self.divisor(h)?;
        let covered = h | self.union();
        let mut out = &self.h_class() + &self.psi().scale(&int((self.marks.size() - card(covered)) as i64));
        for &g in &self.divisors {
            if g != h && is_subset(h, g) {
                let c = card(g & !covered);
                if c > 0 {
                    out = &out - &self.divisor(g)?.scale(&int(c as i64));
                }
            }
        }
        Ok(out)
    }

    /// `(1+H)^{n+1} (1+ψ)^{s_I−1} ∏_{i=1}^{|D′|−l_I} (1+H+iψ)^{n+1}`.
    pub fn chern_fibration_step(&self) -> Result<GradedPoly, StableMapsError> {
        let e = (self.n + 1) as i64;
        let h = self.h_class();
        let psi = self.psi();
        let mut out = GradedPoly::one_plus_pow(&h, e)?;
        out = &out * &GradedPoly::one_plus_pow(&psi, self.maximal_count() as i64 - 1)?;
        for i in 1..=(self.marks.size() - self.union_size()) {
            out = &out * &GradedPoly::one_plus_pow(&(&h + &psi.scale(&int(i as i64))), e)?;
        }
        Ok(out)
    }

    /// The `h`-factor of the closed form, multiplied out directly.
    pub fn divisor_factor(&self, h: u32) -> Result<GradedPoly, StableMapsError> {
        let (psi_h, psi_h0) = self.psi_classes(h)?;
        let hyp = self.hyperplane_class(h)?;
        let e = self.psi_exponent(h);
        let np1 = (self.n + 1) as i64;
        let mut out = GradedPoly::one_plus_pow(&self.divisor(h)?, 1)?;
        out = &out * &GradedPoly::one_plus_pow(&psi_h, e)?;
        out = &out * &GradedPoly::one_plus_pow(&psi_h0, -e)?;
        for j in 1..=self.j_range(h) as i64 {
            let jj = int(j);
            out = &out * &GradedPoly::one_plus_pow(&(&hyp + &psi_h.scale(&jj)), np1)?;
            out = &out * &GradedPoly::one_plus_pow(&(&hyp + &psi_h0.scale(&jj)), -np1)?;
        }
        Ok(out)
    }

    fn product_of_factors(
        &self,
        start: GradedPoly,
        hs: &[u32],
        factor: impl Fn(u32) -> Result<GradedPoly, StableMapsError> + Sync,
    ) -> Result<GradedPoly, StableMapsError> {
        let factors: Vec<GradedPoly> = if self.parallel {
            hs.par_iter().map(|&h| factor(h)).collect::<Result<_, _>>()?
        } else {
            hs.iter().map(|&h| factor(h)).collect::<Result<_, _>>()?
        };
        Ok(factors.iter().fold(start, |acc, f| &acc * f))
    }

    /// Closed form for the stratum at level `k`: the fibration class times
    /// the `h`-factor of every admissible `h` with `|h| > k`.
    pub fn chern_stratum_closed_form(&self, k: u32) -> Result<GradedPoly, StableMapsError> {
        let hs = self.admissible(k);
        self.product_of_factors(self.chern_fibration_step()?, &hs, |h| self.divisor_factor(h))
    }

    /// One blow-up step: multiplies `prev` by the correction of every
    /// admissible `h` with `|h| = k`, evaluated as a weighted blow-up along
    /// a center with normal weights `1, …, |h ∖ ∪I_h|`.
    pub fn chern_blowup_step(&self, k: u32, prev: &GradedPoly) -> Result<GradedPoly, StableMapsError> {
        let hs: Vec<u32> = self.divisors.iter().copied().filter(|&h| card(h) == k).collect();
        self.product_of_factors(prev.clone(), &hs, |h| self.blowup_factor(h))
    }

    /// The `h`-correction through [`wblow::blowup_chern`] with base class 1.
    pub fn blowup_factor(&self, h: u32) -> Result<GradedPoly, StableMapsError> {
        let (psi_h, psi_h0) = self.psi_classes(h)?;
        let hyp = self.hyperplane_class(h)?;
        let e = self.psi_exponent(h);
        let np1 = (self.n + 1) as usize;
        let mut blocks = Vec::new();
        for j in 1..=self.j_range(h) {
            let mut roots = vec![&hyp + &psi_h0.scale(&int(j as i64)); np1];
            if j == 1 && e > 0 {
                roots.extend(std::iter::repeat_n(psi_h0.clone(), e as usize));
            }
            blocks.push(Block::from_roots(j, roots)?);
        }
        if blocks.is_empty() && e > 0 {
            blocks.push(Block::from_roots(1, vec![psi_h0.clone(); e as usize])?);
        }
        let data = WeightedBundleData::new(blocks)?;
        let mut out = wblow::blowup_chern(&self.one(), &data, &self.divisor(h)?)?;
        if e < 0 {
            out = &out * &GradedPoly::one_plus_pow(&psi_h0, -e)?;
            out = &out * &GradedPoly::one_plus_pow(&psi_h, e)?;
        }
        Ok(out)
    }

    /// Iterates blow-up steps `k = |D′|, …, k0+1` over the fibration class.
    /// The `k = |D′|` step is empty unless `h = D′` is admitted.
    pub fn chern_iterated(&self, k0: u32) -> Result<GradedPoly, StableMapsError> {
        let mut c = self.chern_fibration_step()?;
        for k in ((k0 + 1)..=self.marks.size()).rev() {
            c = self.chern_blowup_step(k, &c)?;
        }
        Ok(c)
    }

    /// Sets every `D_h` to zero.
    pub fn collapse_divisors(&self, p: &GradedPoly) -> GradedPoly {
        let idx: Vec<usize> = (2..self.universe.len()).collect();
        p.kill_generators(&idx)
    }
}

/// Guard on the number of divisor generators, `2^{|D′|}` candidates.
pub fn check_budget(d: u32, m: u32, max_degree: u32) -> Result<(), StableMapsError> {
    if d > max_degree {
        return Err(StableMapsError::GeneratorBudget {
            d,
            count: 1u64 << (d + m - 1).min(63),
        });
    }
    Ok(())
}

/// `c(M̄_{0,m}(P^n, d))`, truncated at `cap` (default: the dimension).
pub fn chern_m0m(
    n: u32,
    m: u32,
    d: u32,
    cap: Option<u32>,
    rule: Admissibility,
    max_degree: u32,
) -> Result<(ClassContext, GradedPoly), StableMapsError> {
    check_budget(d, m, max_degree)?;
    let cap = cap.unwrap_or_else(|| ambient_dimension(n, m, d));
    let ctx = ClassContext::for_marked(n, m, d, cap, rule)?;
    let c = ctx.chern_stratum_closed_form(0)?;
    Ok((ctx, c))
}

impl fmt::Display for MarkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.subset_name(self.full()))
    }
}
