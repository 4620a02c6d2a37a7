//! Generators of small cover models: setoids (pair groupoids) and free
//! `Z/n`-sets over action groupoids.

use std::collections::BTreeMap;

use super::{EmbeddedCoverData, FiniteGroupoid, GroupoidError};

/// A named model and the part to keep when subtracting arrows.
#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub keep: String,
    pub data: EmbeddedCoverData,
}

#[derive(Default)]
struct Draft {
    parts: BTreeMap<String, Vec<(String, String)>>,
    equiv: Vec<(String, String)>,
    images: Vec<(String, String, String)>,
}

impl Draft {
    fn finish(self, g: FiniteGroupoid) -> Result<EmbeddedCoverData, GroupoidError> {
        EmbeddedCoverData::new(g, self.parts.into_iter().collect(), self.equiv, self.images)
    }
}

fn block_starts(blocks: &[usize]) -> Vec<usize> {
    blocks
        .iter()
        .scan(0, |acc, &b| {
            let s = *acc;
            *acc += b;
            Some(s)
        })
        .collect()
}

/// Points of `Y` over blocks of a pair groupoid, each point listing the part
/// that receives its token at every object of its block, in order.
pub fn labelled_setoid(blocks: &[usize], points: &[(usize, Vec<&str>)]) -> Result<EmbeddedCoverData, GroupoidError> {
    let g = FiniteGroupoid::pair_groupoid(blocks)?;
    let starts = block_starts(blocks);
    let mut draft = Draft::default();
    for (y, (b, labels)) in points.iter().enumerate() {
        let size = *blocks
            .get(*b)
            .ok_or_else(|| GroupoidError::Cover(format!("point y{y} lies over missing block {b}")))?;
        if labels.len() != size {
            return Err(GroupoidError::Cover(format!(
                "point y{y} needs {size} part labels, got {}",
                labels.len()
            )));
        }
        let token = |i: usize| format!("y{y}@x{}", starts[*b] + i);
        for (i, part) in labels.iter().enumerate() {
            draft
                .parts
                .entry(part.to_string())
                .or_default()
                .push((token(i), format!("x{}", starts[*b] + i)));
            if i > 0 {
                draft.equiv.push((token(0), token(i)));
                draft
                    .images
                    .push((token(0), token(i), format!("x{}>x{}", starts[*b], starts[*b] + i)));
            }
        }
    }
    draft.finish(g)
}

/// `fibers[b]` points over block `b`; point `r` puts its token at the `i`-th
/// object of the block into part `(r + twist·i) mod fibers[b] + 1`.
pub fn twisted_setoid(blocks: &[usize], fibers: &[usize], twist: usize) -> Result<EmbeddedCoverData, GroupoidError> {
    let names: Vec<String> = (1..=fibers.iter().copied().max().unwrap_or(0)).map(|l| l.to_string()).collect();
    let mut points = Vec::new();
    for (b, &m) in fibers.iter().enumerate() {
        for r in 0..m {
            let labels = (0..blocks[b]).map(|i| names[(r + twist * i) % m].as_str()).collect();
            points.push((b, labels));
        }
    }
    labelled_setoid(blocks, &points)
}

/// Free `Z/n`-orbits of `Y`, each given as `(orbit, offset)`, mapped
/// equivariantly onto orbits of the given sizes. At each object the tokens
/// are listed by orbit, rotated by `twist` times the object's position, and
/// the `r`-th goes to part `r + 1`.
pub fn free_action(n: usize, orbits: &[usize], free: &[(usize, usize)], twist: usize) -> Result<EmbeddedCoverData, GroupoidError> {
    let g = FiniteGroupoid::action_groupoid(n, orbits)?;
    let starts = block_starts(orbits);
    let obj = |k: usize, i: usize| format!("o{k}.{}", i % orbits[k]);
    let mut at: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut draft = Draft::default();
    let mut anchor_of = BTreeMap::new();
    for (m, &(k, s)) in free.iter().enumerate() {
        if k >= orbits.len() {
            return Err(GroupoidError::Cover(format!("free orbit {m} maps to missing orbit {k}")));
        }
        for h in 0..n {
            let token = format!("y{m}.{h}");
            at.entry(starts[k] + (s + h) % orbits[k]).or_default().push(token.clone());
            anchor_of.insert(token.clone(), obj(k, s + h));
            if h > 0 {
                draft.equiv.push((format!("y{m}.0"), token.clone()));
                draft.images.push((format!("y{m}.0"), token, format!("{}*{h}", obj(k, s))));
            }
        }
    }
    for (pos, tokens) in at.values().enumerate() {
        let len = tokens.len();
        for r in 0..len {
            let token = &tokens[(r + twist * pos) % len];
            draft
                .parts
                .entry((r + 1).to_string())
                .or_default()
                .push((token.clone(), anchor_of[token].clone()));
        }
    }
    draft.finish(g)
}

/// The fixed suite of models checked for the subtraction construction.
/// Every model stays within 12 objects and 60 arrows.
pub fn suite() -> Result<Vec<Model>, GroupoidError> {
    let mut out = Vec::new();
    let mut push = |name: String, keep: &str, data: EmbeddedCoverData| {
        out.push(Model {
            name,
            keep: keep.to_string(),
            data,
        })
    };
    let setoids: [(&[usize], &[usize], usize); 12] = [
        (&[2], &[1], 0),
        (&[2], &[2], 0),
        (&[2], &[2], 1),
        (&[3], &[2], 0),
        (&[3], &[3], 1),
        (&[3], &[3], 2),
        (&[2, 2], &[2, 1], 1),
        (&[2, 2], &[2, 0], 0),
        (&[4], &[2], 1),
        (&[3, 1], &[3, 2], 1),
        (&[2, 2, 2], &[1, 2, 3], 1),
        (&[4, 2], &[4, 1], 3),
    ];
    for (blocks, fibers, twist) in setoids {
        let data = twisted_setoid(blocks, fibers, twist)?;
        push(format!("setoid {blocks:?} fibers {fibers:?} twist {twist}"), "1", data);
    }
    type Action = (usize, &'static [usize], &'static [(usize, usize)], usize);
    let actions: [Action; 10] = [
        (2, &[2], &[(0, 0)], 0),
        (2, &[2], &[(0, 0), (0, 1)], 0),
        (2, &[2], &[(0, 0), (0, 1)], 1),
        (2, &[1, 2], &[(0, 0)], 0),
        (3, &[3], &[(0, 0), (0, 1)], 1),
        (3, &[3, 1], &[(1, 0)], 0),
        (4, &[4, 2], &[(0, 0), (1, 1)], 1),
        (4, &[2, 2], &[(0, 0), (1, 0)], 0),
        (2, &[2, 2, 1], &[(0, 0), (1, 1), (2, 0)], 1),
        (6, &[6, 3], &[(0, 0), (0, 3)], 0),
    ];
    for (n, orbits, free, twist) in actions {
        let data = free_action(n, orbits, free, twist)?;
        push(format!("Z/{n} on {orbits:?} from {free:?} twist {twist}"), "1", data);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoidlift::{check_groupoid, etale_on_image, subtract_arrows};

    #[test]
    fn suite_is_within_limits() {
        let models = suite().unwrap();
        assert!(models.len() >= 20);
        for m in &models {
            let g = m.data.groupoid();
            assert!(g.object_count() <= 12, "{}", m.name);
            assert!(g.arrow_count() <= 60, "{}", m.name);
        }
    }

    #[test]
    fn suite_has_nested_second_part() {
        let mut nested = 0;
        for m in suite().unwrap() {
            let one = m.data.part(&m.keep).unwrap();
            let rest: Vec<usize> = (0..m.data.parts().len()).filter(|&p| p != one).collect();
            let s11 = m.data.images_between(&[one], &[one]);
            let s22 = m.data.images_between(&rest, &rest);
            let g = m.data.groupoid();
            if s22.is_subset(&s11) && s22.iter().any(|&f| !g.is_identity(f)) {
                nested += 1;
            }
        }
        assert!(nested >= 3, "{nested}");
    }

    #[test]
    fn subtraction_is_a_groupoid_on_every_model() {
        for m in suite().unwrap() {
            assert!(etale_on_image(&m.data, &m.keep).unwrap().is_empty(), "{}", m.name);
            let r = subtract_arrows(&m.data, &m.keep).unwrap();
            let report = check_groupoid(m.data.groupoid(), &r);
            assert!(report.passes, "{}: {}", m.name, report.summary());
        }
    }

    #[test]
    fn generators_reject_bad_shapes() {
        assert!(labelled_setoid(&[2], &[(0, vec!["1"])]).is_err());
        assert!(labelled_setoid(&[2], &[(1, vec!["1", "1"])]).is_err());
        assert!(free_action(4, &[3], &[(0, 0)], 0).is_err());
        assert!(free_action(2, &[2], &[(1, 0)], 0).is_err());
    }
}
