use std::cmp::Ordering;
use std::fmt;

use super::Universe;

/// Sparse exponent vector with its cached graded degree.
///
/// Exponents are stored as `(generator index, exponent)` pairs sorted by
/// index, with no zero exponents. Monomials order graded-lexicographically:
/// first by graded degree, then by the exponent of the latest-declared
/// generator, then the next one down, and so on. Later generators are
/// therefore "larger", which is what rewrite rules eliminating fibre or
/// exceptional classes need.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    degree: u32,
    exps: Vec<(u16, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(index: usize, degree: u32) -> Self {
        Monomial {
            degree,
            exps: vec![(index as u16, 1)],
        }
    }

    /// Builds a monomial from unsorted `(index, exponent)` pairs; repeated
    /// indices accumulate.
    pub fn from_exponents(universe: &Universe, pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut exps: Vec<(u16, u32)> = Vec::new();
        for (idx, e) in pairs {
            if e == 0 {
                continue;
            }
            match exps.iter_mut().find(|(i, _)| *i as usize == idx) {
                Some(slot) => slot.1 += e,
                None => exps.push((idx as u16, e)),
            }
        }
        exps.sort_unstable();
        let degree = exps
            .iter()
            .map(|&(i, e)| universe.generators()[i as usize].degree * e)
            .sum();
        Monomial { degree, exps }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[(u16, u32)] {
        &self.exps
    }

    pub fn exponent(&self, index: usize) -> u32 {
        self.exps
            .iter()
            .find(|(i, _)| *i as usize == index)
            .map_or(0, |&(_, e)| e)
    }

    /// Total number of generator factors, ignoring generator degrees.
    pub fn total_exponent(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    pub fn involves(&self, index: usize) -> bool {
        self.exps.iter().any(|&(i, _)| i as usize == index)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            let (a, b) = (self.exps[i], other.exps[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    exps.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    exps.push(b);
                    j += 1;
                }
                Ordering::Equal => {
                    exps.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        exps.extend_from_slice(&self.exps[i..]);
        exps.extend_from_slice(&other.exps[j..]);
        Monomial {
            degree: self.degree + other.degree,
            exps,
        }
    }

    /// `self / divisor` when `divisor` divides `self`.
    pub fn div(&self, divisor: &Monomial) -> Option<Monomial> {
        if divisor.degree > self.degree {
            return None;
        }
        let mut exps = Vec::with_capacity(self.exps.len());
        let mut j = 0;
        for &(idx, e) in &self.exps {
            if j < divisor.exps.len() && divisor.exps[j].0 < idx {
                return None;
            }
            if j < divisor.exps.len() && divisor.exps[j].0 == idx {
                let d = divisor.exps[j].1;
                if d > e {
                    return None;
                }
                if e > d {
                    exps.push((idx, e - d));
                }
                j += 1;
            } else {
                exps.push((idx, e));
            }
        }
        if j < divisor.exps.len() {
            return None;
        }
        Some(Monomial {
            degree: self.degree - divisor.degree,
            exps,
        })
    }

    pub fn lcm(&self, other: &Monomial, universe: &Universe) -> Monomial {
        let mut pairs: Vec<(usize, u32)> = self.exps.iter().map(|&(i, e)| (i as usize, e)).collect();
        for &(i, e) in &other.exps {
            match pairs.iter_mut().find(|(j, _)| *j == i as usize) {
                Some(slot) => slot.1 = slot.1.max(e),
                None => pairs.push((i as usize, e)),
            }
        }
        Monomial::from_exponents(universe, pairs)
    }

    /// Renders as `H^2*psi`, or `1` for the unit monomial.
    pub fn display<'a>(&'a self, universe: &'a Universe) -> MonomialDisplay<'a> {
        MonomialDisplay { mono: self, universe }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            let (mut i, mut j) = (self.exps.len(), other.exps.len());
            while i > 0 && j > 0 {
                let (a, b) = (self.exps[i - 1], other.exps[j - 1]);
                match a.0.cmp(&b.0) {
                    Ordering::Equal => match a.1.cmp(&b.1) {
                        Ordering::Equal => {
                            i -= 1;
                            j -= 1;
                        }
                        ord => return ord,
                    },
                    ord => return ord,
                }
            }
            i.cmp(&j)
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct MonomialDisplay<'a> {
    mono: &'a Monomial,
    universe: &'a Universe,
}

impl fmt::Display for MonomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mono.is_one() {
            return f.write_str("1");
        }
        for (k, &(idx, e)) in self.mono.exps.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            f.write_str(&self.universe.generators()[idx as usize].name)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}
