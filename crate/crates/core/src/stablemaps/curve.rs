//! Combinatorial models of a stable map's source curve: a tree of
//! components with degrees, base points with multiplicities, marked points,
//! and optional degree-label partitions or splitting-type markers.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{is_nested, StableMapsError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub id: String,
    pub degree: u32,
    #[serde(default)]
    pub parent: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasePoint {
    pub component: String,
    pub mult: u32,
}

/// What a partition block is attached to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Owner {
    Component(String),
    BasePoint(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionBlock {
    pub owner: Owner,
    pub block: Vec<u32>,
}

/// Marks the tail `C_h` as the subtree hanging from `component`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailMarker {
    pub h: Vec<u32>,
    pub component: String,
}

/// Marks the base point `p_h`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMarker {
    pub h: Vec<u32>,
    pub base_point: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveModel {
    pub components: Vec<Component>,
    #[serde(default)]
    pub base_points: Vec<BasePoint>,
    /// Marked point label (`"1"`, `"2"`, …) to component id.
    pub marks: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<PartitionBlock>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tails: Vec<TailMarker>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointMarker>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurveViolation {
    pub condition: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurveReport {
    pub valid: bool,
    pub violations: Vec<CurveViolation>,
}

impl CurveReport {
    fn from(violations: Vec<CurveViolation>) -> Self {
        CurveReport {
            valid: violations.is_empty(),
            violations,
        }
    }
}

fn violation(condition: &str, detail: String) -> CurveViolation {
    CurveViolation {
        condition: condition.to_string(),
        detail,
    }
}

fn show(h: &BTreeSet<u32>) -> String {
    let parts: Vec<String> = h.iter().map(u32::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

/// Tree structure resolved to indices, rooted at the first marked point.
struct Tree {
    parent: Vec<Option<usize>>,
}

impl Tree {
    /// True when `node` lies in the subtree hanging from `top`.
    fn below(&self, mut node: usize, top: usize) -> bool {
        loop {
            if node == top {
                return true;
            }
            match self.parent[node] {
                Some(p) => node = p,
                None => return false,
            }
        }
    }
}

impl CurveModel {
    /// Total degree `d = Σ component degrees + Σ base-point multiplicities`.
    pub fn total_degree(&self) -> u32 {
        self.components.iter().map(|c| c.degree).sum::<u32>() + self.base_points.iter().map(|b| b.mult).sum::<u32>()
    }

    fn component_index(&self, id: &str) -> Option<usize> {
        self.components.iter().position(|c| c.id == id)
    }

    /// Checks the tree shape and references; the tree is re-rooted so that
    /// the component carrying mark `"1"` is the root.
    fn tree(&self) -> Result<Tree, StableMapsError> {
        let bad = |s: String| StableMapsError::Parameters(s);
        let n = self.components.len();
        if n == 0 {
            return Err(bad("curve has no components".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &self.components {
            if !seen.insert(c.id.as_str()) {
                return Err(bad(format!("duplicate component `{}`", c.id)));
            }
        }
        let mut adj = vec![Vec::new(); n];
        let mut roots = 0;
        for (i, c) in self.components.iter().enumerate() {
            match &c.parent {
                None => roots += 1,
                Some(p) => {
                    let j = self
                        .component_index(p)
                        .ok_or_else(|| bad(format!("unknown parent `{p}` of `{}`", c.id)))?;
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        if roots != 1 || n - 1 != adj.iter().map(Vec::len).sum::<usize>() / 2 {
            return Err(bad("components do not form a tree".into()));
        }
        for (label, comp) in &self.marks {
            if self.component_index(comp).is_none() {
                return Err(bad(format!("mark `{label}` on unknown component `{comp}`")));
            }
        }
        let first = self
            .marks
            .get("1")
            .ok_or_else(|| bad("mark `1` is missing".into()))?;
        let root = self.component_index(first).expect("checked above");
        let mut parent = vec![None; n];
        let mut visited = vec![false; n];
        let mut stack = vec![root];
        visited[root] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = Some(v);
                    stack.push(w);
                }
            }
        }
        if visited.iter().any(|v| !v) {
            return Err(bad("components do not form a tree".into()));
        }
        for (i, b) in self.base_points.iter().enumerate() {
            if self.component_index(&b.component).is_none() {
                return Err(bad(format!("base point {i} on unknown component `{}`", b.component)));
            }
        }
        Ok(Tree { parent })
    }

    fn subtree_degree(&self, tree: &Tree, top: usize) -> u32 {
        let comps: u32 = (0..self.components.len())
            .filter(|&i| tree.below(i, top))
            .map(|i| self.components[i].degree)
            .sum();
        let points: u32 = self
            .base_points
            .iter()
            .filter(|b| tree.below(self.component_index(&b.component).expect("checked"), top))
            .map(|b| b.mult)
            .sum();
        comps + points
    }

    /// Checks the splitting-type conditions for the stratum `nested` (subsets
    /// of `{1, …, d}`) at level `k`: tails for `|h| > d − k`, base points for
    /// `|h| ≤ d − k`, and the incidence relations between them.
    pub fn validate_splitting_type(&self, nested: &[Vec<u32>], k: u32) -> Result<CurveReport, StableMapsError> {
        let tree = self.tree()?;
        let d = self.total_degree();
        let mut v = Vec::new();
        let sets: Vec<BTreeSet<u32>> = nested.iter().map(|h| h.iter().copied().collect()).collect();
        for h in &sets {
            if h.is_empty() || h.iter().any(|&x| x == 0 || x > d) || h.len() as u32 == d {
                v.push(violation("nested", format!("{} is not a proper nonempty subset of D", show(h))));
            }
        }
        let masks: Vec<u32> = sets.iter().map(|h| h.iter().fold(0u32, |a, &x| a | 1 << (x.min(31)))).collect();
        if !is_nested(&masks) {
            v.push(violation("nested", "I is not a nested set".into()));
        }
        let threshold = d.saturating_sub(k);
        let large = |h: &BTreeSet<u32>| h.len() as u32 > threshold;
        let small: Vec<&BTreeSet<u32>> = sets.iter().filter(|h| !large(h)).collect();
        for (i, a) in small.iter().enumerate() {
            for b in &small[i + 1..] {
                if !a.is_disjoint(b) {
                    v.push(violation("nested", format!("base-point sets {} and {} meet", show(a), show(b))));
                }
            }
        }
        let tail_of = |h: &BTreeSet<u32>| -> Option<usize> {
            self.tails
                .iter()
                .find(|t| t.h.iter().copied().collect::<BTreeSet<_>>() == *h)
                .and_then(|t| self.component_index(&t.component))
        };
        let point_of = |h: &BTreeSet<u32>| -> Option<usize> {
            self.points
                .iter()
                .find(|p| p.h.iter().copied().collect::<BTreeSet<_>>() == *h)
                .map(|p| p.base_point)
        };
        for h in &sets {
            if large(h) {
                match tail_of(h) {
                    None => v.push(violation("1", format!("no tail marked by {}", show(h)))),
                    Some(top) => {
                        if tree.parent[top].is_none() {
                            v.push(violation("1", format!("tail of {} contains the first marked point", show(h))));
                        }
                        let deg = self.subtree_degree(&tree, top);
                        if deg != h.len() as u32 {
                            v.push(violation("1", format!("tail of {} has degree {deg}", show(h))));
                        }
                    }
                }
            } else {
                match point_of(h) {
                    Some(i) if i < self.base_points.len() => {
                        let mult = self.base_points[i].mult;
                        if mult != h.len() as u32 {
                            v.push(violation("2", format!("base point of {} has multiplicity {mult}", show(h))));
                        }
                    }
                    _ => v.push(violation("2", format!("no base point marked by {}", show(h)))),
                }
            }
        }
        for a in &sets {
            for b in &sets {
                if a == b {
                    continue;
                }
                match (large(a), large(b)) {
                    (false, true) => {
                        let (Some(i), Some(top)) = (point_of(a), tail_of(b)) else {
                            continue;
                        };
                        let Some(bp) = self.base_points.get(i) else { continue };
                        let inside = tree.below(self.component_index(&bp.component).expect("checked"), top);
                        if inside != a.is_subset(b) {
                            v.push(violation(
                                "3",
                                format!(
                                    "{} ⊂ {} is {} but the base point is {} the tail",
                                    show(a),
                                    show(b),
                                    a.is_subset(b),
                                    if inside { "inside" } else { "outside" }
                                ),
                            ));
                        }
                    }
                    (true, true) if a < b => {
                        let (Some(ta), Some(tb)) = (tail_of(a), tail_of(b)) else {
                            continue;
                        };
                        let ok = if b.is_subset(a) {
                            tree.below(tb, ta)
                        } else if a.is_subset(b) {
                            tree.below(ta, tb)
                        } else {
                            !tree.below(ta, tb) && !tree.below(tb, ta)
                        };
                        if !ok {
                            v.push(violation(
                                "3",
                                format!("tails of {} and {} are incompatibly placed", show(a), show(b)),
                            ));
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok(CurveReport::from(v))
    }

    /// Checks that the partition blocks are attached one-to-one to components
    /// and base points, partition `{1, …, d}`, and have sizes equal to the
    /// component degree or base-point multiplicity.
    pub fn validate_partition(&self) -> Result<CurveReport, StableMapsError> {
        self.tree()?;
        let blocks = self
            .partition
            .as_ref()
            .ok_or_else(|| StableMapsError::Parameters("curve has no partition".into()))?;
        let d = self.total_degree();
        let mut v = Vec::new();
        let mut owners = BTreeSet::new();
        let mut used = BTreeSet::new();
        for b in blocks {
            let (name, expected) = match &b.owner {
                Owner::Component(id) => match self.component_index(id) {
                    Some(i) => (format!("component `{id}`"), self.components[i].degree),
                    None => {
                        v.push(violation("owner", format!("unknown component `{id}`")));
                        continue;
                    }
                },
                Owner::BasePoint(i) => match self.base_points.get(*i) {
                    Some(bp) => (format!("base point {i}"), bp.mult),
                    None => {
                        v.push(violation("owner", format!("unknown base point {i}")));
                        continue;
                    }
                },
            };
            if !owners.insert(name.clone()) {
                v.push(violation("owner", format!("{name} has two blocks")));
            }
            for &x in &b.block {
                if x == 0 || x > d {
                    v.push(violation("cover", format!("label {x} outside 1..{d}")));
                } else if !used.insert(x) {
                    v.push(violation("cover", format!("label {x} appears twice")));
                }
            }
            if b.block.len() as u32 != expected {
                let cond = if matches!(b.owner, Owner::Component(_)) { "1" } else { "2" };
                v.push(violation(
                    cond,
                    format!("{name} has block size {} but expects {expected}", b.block.len()),
                ));
            }
        }
        for c in &self.components {
            if !owners.contains(&format!("component `{}`", c.id)) {
                v.push(violation("owner", format!("component `{}` has no block", c.id)));
            }
        }
        for (i, bp) in self.base_points.iter().enumerate() {
            if bp.mult > 0 && !owners.contains(&format!("base point {i}")) {
                v.push(violation("owner", format!("base point {i} has no block")));
            }
        }
        for x in 1..=d {
            if !used.contains(&x) {
                v.push(violation("cover", format!("label {x} is in no block")));
            }
        }
        Ok(CurveReport::from(v))
    }
}
