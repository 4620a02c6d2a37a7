use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::{GringError, Monomial, Rational, Universe};

/// Sparse polynomial over [`Rational`], truncated above graded degree `cap`.
///
/// Terms are kept in a `BTreeMap` keyed by the graded-lex [`Monomial`]
/// order, so iteration (and therefore serialization) is canonical.
#[derive(Clone, Debug)]
pub struct GradedPoly {
    universe: Arc<Universe>,
    cap: u32,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for GradedPoly {
    fn eq(&self, other: &Self) -> bool {
        self.cap == other.cap && self.terms == other.terms && same_universe(&self.universe, &other.universe)
    }
}

impl Eq for GradedPoly {}

fn same_universe(a: &Arc<Universe>, b: &Arc<Universe>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl GradedPoly {
    pub fn zero(universe: &Arc<Universe>, cap: u32) -> Self {
        GradedPoly {
            universe: Arc::clone(universe),
            cap,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(universe: &Arc<Universe>, cap: u32) -> Self {
        Self::constant(universe, cap, Rational::one())
    }

    pub fn constant(universe: &Arc<Universe>, cap: u32, c: Rational) -> Self {
        let mut p = Self::zero(universe, cap);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    /// The generator `name` as a polynomial (zero if its degree exceeds `cap`).
    pub fn generator(universe: &Arc<Universe>, cap: u32, name: &str) -> Result<Self, GringError> {
        let idx = universe.require(name)?;
        Ok(Self::var(universe, cap, idx))
    }

    pub fn var(universe: &Arc<Universe>, cap: u32, index: usize) -> Self {
        let degree = universe.generators()[index].degree;
        Self::from_terms(universe, cap, [(Monomial::var(index, degree), Rational::one())])
    }

    /// Collects terms, summing repeats and dropping zero or above-cap terms.
    pub fn from_terms(
        universe: &Arc<Universe>,
        cap: u32,
        terms: impl IntoIterator<Item = (Monomial, Rational)>,
    ) -> Self {
        let mut p = Self::zero(universe, cap);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Linear form `Σ coef·generator` from `(name, coefficient)` pairs.
    pub fn linear(
        universe: &Arc<Universe>,
        cap: u32,
        parts: impl IntoIterator<Item = (impl AsRef<str>, Rational)>,
    ) -> Result<Self, GringError> {
        let mut p = Self::zero(universe, cap);
        for (name, c) in parts {
            let idx = universe.require(name.as_ref())?;
            let deg = universe.generators()[idx].degree;
            p.add_term(Monomial::var(idx, deg), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if m.degree() > self.cap || c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.constant_term().is_one()
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Coefficient of the monomial written as `(generator name, exponent)` pairs.
    pub fn coefficient_of(&self, parts: &[(&str, u32)]) -> Result<Rational, GringError> {
        let pairs = parts
            .iter()
            .map(|(n, e)| self.universe.require(n).map(|i| (i, *e)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.coefficient(&Monomial::from_exponents(&self.universe, pairs)))
    }

    /// Highest graded degree carrying a nonzero term.
    pub fn top_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    /// Checks that `other` lives over the same generators at the same cap.
    pub fn check_compatible(&self, other: &GradedPoly) -> Result<(), GringError> {
        if !same_universe(&self.universe, &other.universe) {
            return Err(GringError::UniverseMismatch);
        }
        if self.cap != other.cap {
            return Err(GringError::CapMismatch(self.cap, other.cap));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &GradedPoly) -> Result<GradedPoly, GringError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &GradedPoly) -> Result<GradedPoly, GringError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    /// Truncated product. Only degree pairs summing to at most `cap` are
    /// ever multiplied.
    pub fn checked_mul(&self, other: &GradedPoly) -> Result<GradedPoly, GringError> {
        self.check_compatible(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(&self.universe, self.cap));
        }
        if self.is_one() {
            return Ok(other.clone());
        }
        if other.is_one() {
            return Ok(self.clone());
        }
        let a = self.by_degree();
        let b = other.by_degree();
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (da, ta) in a.iter().enumerate() {
            for (db, tb) in b.iter().enumerate() {
                if da + db > self.cap as usize {
                    break;
                }
                for (ma, ca) in ta {
                    for (mb, cb) in tb {
                        let m = ma.mul(mb);
                        let c: Rational = *ca * *cb;
                        match acc.get_mut(&m) {
                            Some(slot) => *slot += c,
                            None => {
                                acc.insert(m, c);
                            }
                        }
                    }
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(GradedPoly {
            universe: Arc::clone(&self.universe),
            cap: self.cap,
            terms,
        })
    }

    fn by_degree(&self) -> Vec<Vec<(&Monomial, &Rational)>> {
        let mut out: Vec<Vec<(&Monomial, &Rational)>> = vec![Vec::new(); self.cap as usize + 1];
        for (m, c) in &self.terms {
            out[m.degree() as usize].push((m, c));
        }
        while out.last().is_some_and(Vec::is_empty) {
            out.pop();
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> GradedPoly {
        if c.is_zero() {
            return Self::zero(&self.universe, self.cap);
        }
        GradedPoly {
            universe: Arc::clone(&self.universe),
            cap: self.cap,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Inverse of a polynomial with nonzero constant term, up to `cap`.
    ///
    /// Solved degree by degree: `b_0 = 1/a_0` and
    /// `b_k = -(1/a_0) Σ_{i=1..k} a_i b_{k-i}`.
    pub fn inv_unit(&self) -> Result<GradedPoly, GringError> {
        let a0 = self.constant_term();
        if a0.is_zero() {
            return Err(GringError::NotAUnit);
        }
        let inv0 = a0.recip();
        let cap = self.cap as usize;
        let parts: Vec<GradedPoly> = (0..=cap).map(|k| self.degree_part_unchecked(k as u32)).collect();
        let mut b: Vec<GradedPoly> = Vec::with_capacity(cap + 1);
        b.push(Self::constant(&self.universe, self.cap, inv0.clone()));
        let minus_inv0 = -inv0;
        for k in 1..=cap {
            let mut acc = Self::zero(&self.universe, self.cap);
            for i in 1..=k {
                if parts[i].is_zero() || b[k - i].is_zero() {
                    continue;
                }
                acc = &acc + &(&parts[i] * &b[k - i]);
            }
            b.push(acc.scale(&minus_inv0));
        }
        let mut out = Self::zero(&self.universe, self.cap);
        for part in b {
            for (m, c) in part.terms {
                out.add_term(m, c);
            }
        }
        Ok(out)
    }

    /// Integer power; negative exponents go through [`inv_unit`](Self::inv_unit).
    pub fn pow(&self, e: i64) -> Result<GradedPoly, GringError> {
        let base = if e < 0 { self.inv_unit()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut result = Self::one(&self.universe, self.cap);
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &sq;
            }
            n >>= 1;
            if n > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(result)
    }

    /// `(1 + x)^e` for `x` without constant term, as the truncated binomial
    /// series `Σ_i C(e, i) x^i`; valid for negative `e` as well.
    pub fn one_plus_pow(x: &GradedPoly, e: i64) -> Result<GradedPoly, GringError> {
        if !x.constant_term().is_zero() {
            return Err(GringError::Parse("series base must have zero constant term".into()));
        }
        let mut out = Self::one(&x.universe, x.cap);
        let mut power = out.clone();
        let mut coef = Rational::one();
        for i in 0..x.cap as i64 {
            coef = coef * Rational::from_integer((e - i).into()) / Rational::from_integer((i + 1).into());
            if coef.is_zero() {
                break;
            }
            power = &power * x;
            if power.is_zero() {
                break;
            }
            out = &out + &power.scale(&coef);
        }
        Ok(out)
    }

    /// Sum of the terms of graded degree exactly `k`.
    pub fn degree_part(&self, k: u32) -> Result<GradedPoly, GringError> {
        if k > self.cap {
            return Err(GringError::DegreeAboveCap { k, cap: self.cap });
        }
        Ok(self.degree_part_unchecked(k))
    }

    fn degree_part_unchecked(&self, k: u32) -> GradedPoly {
        GradedPoly {
            universe: Arc::clone(&self.universe),
            cap: self.cap,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drops every term above `cap` and lowers the cap (never raises it).
    pub fn truncate(&self, cap: u32) -> GradedPoly {
        let cap = cap.min(self.cap);
        GradedPoly {
            universe: Arc::clone(&self.universe),
            cap,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= cap)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Sets the listed generators to zero.
    pub fn kill_generators(&self, indices: &[usize]) -> GradedPoly {
        GradedPoly {
            universe: Arc::clone(&self.universe),
            cap: self.cap,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !indices.iter().any(|&i| m.involves(i)))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Degree-1 coefficient of every degree-1 generator that appears, by name.
    pub fn linear_coefficients(&self) -> BTreeMap<String, Rational> {
        self.terms
            .iter()
            .filter(|(m, _)| m.total_exponent() == 1 && m.degree() == 1)
            .map(|(m, c)| {
                let idx = m.exponents()[0].0 as usize;
                (self.universe.generators()[idx].name.clone(), c.clone())
            })
            .collect()
    }

    /// True when every term has graded degree exactly `k`.
    pub fn is_homogeneous_of(&self, k: u32) -> bool {
        self.terms.keys().all(|m| m.degree() == k)
    }
}

/// A ring homomorphism given by generator images, possibly into another
/// generator set. Generators without an explicit image map to the
/// same-named generator of the target.
#[derive(Clone, Debug)]
pub struct Substitution {
    target: Arc<Universe>,
    cap: u32,
    images: BTreeMap<String, GradedPoly>,
}

impl Substitution {
    pub fn new(target: &Arc<Universe>, cap: u32) -> Self {
        Substitution {
            target: Arc::clone(target),
            cap,
            images: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: impl Into<String>, image: GradedPoly) -> Result<Self, GringError> {
        let probe = GradedPoly::zero(&self.target, self.cap);
        probe.check_compatible(&image)?;
        self.images.insert(name.into(), image);
        Ok(self)
    }

    pub fn target(&self) -> &Arc<Universe> {
        &self.target
    }

    pub fn apply(&self, p: &GradedPoly) -> Result<GradedPoly, GringError> {
        let src = p.universe();
        let mut images: Vec<GradedPoly> = Vec::with_capacity(src.len());
        let mut used = vec![false; src.len()];
        for (m, _) in p.terms() {
            for &(i, _) in m.exponents() {
                used[i as usize] = true;
            }
        }
        for (i, g) in src.generators().iter().enumerate() {
            let img = if !used[i] {
                GradedPoly::zero(&self.target, self.cap)
            } else if let Some(img) = self.images.get(&g.name) {
                img.clone()
            } else {
                let j = self.target.require(&g.name)?;
                if self.target.generators()[j].degree != g.degree {
                    return Err(GringError::InvalidGenerator {
                        name: g.name.clone(),
                        reason: "degree differs in target".into(),
                    });
                }
                GradedPoly::var(&self.target, self.cap, j)
            };
            images.push(img);
        }
        let mut out = GradedPoly::zero(&self.target, self.cap);
        let mut powers: HashMap<(u16, u32), GradedPoly> = HashMap::new();
        for (m, c) in p.terms() {
            let mut term = GradedPoly::constant(&self.target, self.cap, c.clone());
            for &(i, e) in m.exponents() {
                let pw = powers
                    .entry((i, e))
                    .or_insert_with(|| images[i as usize].pow(e as i64).expect("nonnegative power"));
                term = &term * pw;
                if term.is_zero() {
                    break;
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }
}

impl<'a> Add<&'a GradedPoly> for &'a GradedPoly {
    type Output = GradedPoly;

    /// Panics on mismatched generator sets or caps; use
    /// [`GradedPoly::checked_add`] for untrusted input.
    fn add(self, rhs: &'a GradedPoly) -> GradedPoly {
        self.checked_add(rhs).expect("incompatible polynomials")
    }
}

impl<'a> Sub<&'a GradedPoly> for &'a GradedPoly {
    type Output = GradedPoly;

    fn sub(self, rhs: &'a GradedPoly) -> GradedPoly {
        self.checked_sub(rhs).expect("incompatible polynomials")
    }
}

impl<'a> Mul<&'a GradedPoly> for &'a GradedPoly {
    type Output = GradedPoly;

    fn mul(self, rhs: &'a GradedPoly) -> GradedPoly {
        self.checked_mul(rhs).expect("incompatible polynomials")
    }
}

impl Neg for &GradedPoly {
    type Output = GradedPoly;

    fn neg(self) -> GradedPoly {
        self.scale(&-Rational::one())
    }
}

/// Text form such as `1 + 3*H - 1*E + 5/2*H*psi`.
impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = c.abs();
            if m.is_one() {
                write!(f, "{abs}")?;
            } else {
                write!(f, "{abs}*{}", m.display(&self.universe))?;
            }
        }
        Ok(())
    }
}
