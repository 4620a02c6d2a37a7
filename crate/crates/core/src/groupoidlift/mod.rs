//! Finite groupoid models of étale presentations `[R ⇉ U]`, and the
//! arrow-subtracted presentations of the lifted stacks.
//!
//! Composition is written in diagrammatic order: `compose(f, g)` is defined
//! when `target(f) = source(g)` and runs from `source(f)` to `target(g)`.

mod cover;
pub mod models;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stratnet::StratnetError;

pub use cover::{
    etale_on_image, fiber_decomposition_counts, iterated_lift, subtract_arrows, EmbeddedCoverData,
    FiberCounts, LiftReading, Part,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupoidError {
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("groupoid axiom `{axiom}` fails: {detail}")]
    Axiom { axiom: &'static str, detail: String },
    #[error("malformed cover data: {0}")]
    Cover(String),
    #[error("arrow `{arrow}` lies in both a kept image ({kept}) and a removed one ({removed})")]
    Ambiguous {
        arrow: String,
        kept: String,
        removed: String,
    },
    #[error("presentation at {index} is not a groupoid: {summary}")]
    Construction { index: String, summary: String },
    #[error(transparent)]
    Network(#[from] StratnetError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct ArrowData {
    name: String,
    src: usize,
    tgt: usize,
}

#[derive(Clone, Debug)]
pub struct FiniteGroupoid {
    objects: Vec<String>,
    object_index: HashMap<String, usize>,
    arrows: Vec<ArrowData>,
    arrow_index: HashMap<String, usize>,
    compose: Vec<Option<usize>>,
    inverse: Vec<usize>,
    identity: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowJson {
    pub id: String,
    pub src: String,
    pub tgt: String,
}

/// A groupoid together with optional cover data; cover fields may be empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub objects: Vec<String>,
    pub arrows: Vec<ArrowJson>,
    pub compose: Vec<[String; 3]>,
    pub inverse: Vec<[String; 2]>,
    /// Part label (`"1"` or `"1/a"`) to a map from token to anchor object.
    #[serde(default)]
    pub parts: std::collections::BTreeMap<String, std::collections::BTreeMap<String, String>>,
    #[serde(default)]
    pub equiv: Vec<[String; 2]>,
    #[serde(default)]
    pub arrow_image: Vec<[String; 3]>,
}

impl FiniteGroupoid {
    /// Builds a groupoid from named data and checks every axiom exhaustively.
    pub fn new(
        objects: Vec<String>,
        arrows: Vec<(String, String, String)>,
        compose: Vec<(String, String, String)>,
        inverse: Vec<(String, String)>,
    ) -> Result<Self, GroupoidError> {
        let mut object_index = HashMap::new();
        for (i, o) in objects.iter().enumerate() {
            if object_index.insert(o.clone(), i).is_some() {
                return Err(GroupoidError::Duplicate {
                    kind: "object",
                    name: o.clone(),
                });
            }
        }
        let obj = |name: &str| {
            object_index.get(name).copied().ok_or_else(|| GroupoidError::Unknown {
                kind: "object",
                name: name.to_string(),
            })
        };
        let mut list = Vec::with_capacity(arrows.len());
        let mut arrow_index = HashMap::new();
        for (name, s, t) in arrows {
            let data = ArrowData {
                src: obj(&s)?,
                tgt: obj(&t)?,
                name: name.clone(),
            };
            if arrow_index.insert(name.clone(), list.len()).is_some() {
                return Err(GroupoidError::Duplicate { kind: "arrow", name });
            }
            list.push(data);
        }
        let arr = |name: &str| {
            arrow_index.get(name).copied().ok_or_else(|| GroupoidError::Unknown {
                kind: "arrow",
                name: name.to_string(),
            })
        };
        let n = list.len();
        let mut table = vec![None; n * n];
        for (f, g, h) in &compose {
            let (f, g, h) = (arr(f)?, arr(g)?, arr(h)?);
            let slot = &mut table[f * n + g];
            if slot.is_some_and(|x| x != h) {
                return Err(GroupoidError::Axiom {
                    axiom: "composition is a function",
                    detail: format!("{} then {} listed twice", list[f].name, list[g].name),
                });
            }
            *slot = Some(h);
        }
        let mut inv = vec![None; n];
        for (f, g) in &inverse {
            let (f, g) = (arr(f)?, arr(g)?);
            if inv[f].is_some_and(|x| x != g) {
                return Err(GroupoidError::Axiom {
                    axiom: "inverse is a function",
                    detail: format!("{} has two inverses", list[f].name),
                });
            }
            inv[f] = Some(g);
        }
        let inverse = inv
            .iter()
            .enumerate()
            .map(|(f, g)| {
                g.ok_or_else(|| GroupoidError::Axiom {
                    axiom: "inverse is total",
                    detail: format!("{} has no inverse", list[f].name),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let g = FiniteGroupoid {
            identity: Vec::new(),
            objects,
            object_index,
            arrows: list,
            arrow_index,
            compose: table,
            inverse,
        };
        g.with_identities()
    }

    fn with_identities(mut self) -> Result<Self, GroupoidError> {
        let n = self.arrows.len();
        let ax = |axiom: &'static str, detail: String| GroupoidError::Axiom { axiom, detail };
        for f in 0..n {
            for g in 0..n {
                let composable = self.arrows[f].tgt == self.arrows[g].src;
                match (composable, self.compose[f * n + g]) {
                    (true, None) => {
                        return Err(ax(
                            "composable pairs compose",
                            format!("{} then {} is missing", self.arrows[f].name, self.arrows[g].name),
                        ))
                    }
                    (false, Some(_)) => {
                        return Err(ax(
                            "only composable pairs compose",
                            format!("{} then {} is listed", self.arrows[f].name, self.arrows[g].name),
                        ))
                    }
                    (true, Some(h)) => {
                        if self.arrows[h].src != self.arrows[f].src || self.arrows[h].tgt != self.arrows[g].tgt {
                            return Err(ax(
                                "composite endpoints",
                                format!("{} then {} gives {}", self.arrows[f].name, self.arrows[g].name, self.arrows[h].name),
                            ));
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        for f in 0..n {
            for g in 0..n {
                let Some(fg) = self.compose[f * n + g] else { continue };
                for h in 0..n {
                    let Some(gh) = self.compose[g * n + h] else { continue };
                    if self.compose[fg * n + h] != self.compose[f * n + gh] {
                        return Err(ax(
                            "associativity",
                            format!(
                                "({} {} {})",
                                self.arrows[f].name, self.arrows[g].name, self.arrows[h].name
                            ),
                        ));
                    }
                }
            }
        }
        let mut identity = Vec::with_capacity(self.objects.len());
        for x in 0..self.objects.len() {
            let candidates: Vec<usize> = (0..n)
                .filter(|&e| {
                    self.arrows[e].src == x && self.arrows[e].tgt == x && self.compose[e * n + e] == Some(e)
                })
                .collect();
            let [e] = candidates[..] else {
                return Err(ax(
                    "unique identity",
                    format!("object {} has {} idempotent loops", self.objects[x], candidates.len()),
                ));
            };
            for f in 0..n {
                if self.arrows[f].src == x && self.compose[e * n + f] != Some(f) {
                    return Err(ax("left identity", format!("{} at {}", self.arrows[f].name, self.objects[x])));
                }
                if self.arrows[f].tgt == x && self.compose[f * n + e] != Some(f) {
                    return Err(ax("right identity", format!("{} at {}", self.arrows[f].name, self.objects[x])));
                }
            }
            identity.push(e);
        }
        for f in 0..n {
            let g = self.inverse[f];
            let (s, t) = (self.arrows[f].src, self.arrows[f].tgt);
            if self.compose[f * n + g] != Some(identity[s]) || self.compose[g * n + f] != Some(identity[t]) {
                return Err(ax(
                    "inverse",
                    format!("{} and {}", self.arrows[f].name, self.arrows[g].name),
                ));
            }
        }
        self.identity = identity;
        Ok(self)
    }

    /// The pair groupoid of an equivalence relation given by block sizes:
    /// one arrow `xi>xj` for every ordered pair in a block.
    pub fn pair_groupoid(blocks: &[usize]) -> Result<Self, GroupoidError> {
        let mut objects = Vec::new();
        let mut block_of = Vec::new();
        for (b, &size) in blocks.iter().enumerate() {
            for _ in 0..size {
                block_of.push(b);
                objects.push(format!("x{}", objects.len()));
            }
        }
        let name = |i: usize, j: usize| format!("x{i}>x{j}");
        let n = objects.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| block_of[i] == block_of[j])
            .collect();
        let arrows = pairs.iter().map(|&(i, j)| (name(i, j), objects[i].clone(), objects[j].clone())).collect();
        let mut compose = Vec::new();
        for &(i, j) in &pairs {
            for &(j2, k) in &pairs {
                if j == j2 {
                    compose.push((name(i, j), name(j, k), name(i, k)));
                }
            }
        }
        let inverse = pairs.iter().map(|&(i, j)| (name(i, j), name(j, i))).collect();
        Self::new(objects, arrows, compose, inverse)
    }

    /// The action groupoid of `Z/n` on a disjoint union of orbits of the
    /// given sizes (each dividing `n`); arrow `u*h` runs from `u` to `h·u`.
    pub fn action_groupoid(n: usize, orbits: &[usize]) -> Result<Self, GroupoidError> {
        let mut objects = Vec::new();
        let mut act: Vec<Vec<usize>> = Vec::new();
        for (k, &size) in orbits.iter().enumerate() {
            if size == 0 || !n.is_multiple_of(size) {
                return Err(GroupoidError::Cover(format!("orbit size {size} does not divide {n}")));
            }
            let base = objects.len();
            for i in 0..size {
                objects.push(format!("o{k}.{i}"));
                act.push((0..n).map(|h| base + (i + h) % size).collect());
            }
        }
        let name = |u: usize, h: usize| format!("{}*{h}", objects[u]);
        let mut arrows = Vec::new();
        let mut compose = Vec::new();
        let mut inverse = Vec::new();
        for u in 0..objects.len() {
            for h in 0..n {
                arrows.push((name(u, h), objects[u].clone(), objects[act[u][h]].clone()));
                inverse.push((name(u, h), name(act[u][h], (n - h) % n)));
                for g in 0..n {
                    compose.push((name(u, h), name(act[u][h], g), name(u, (h + g) % n)));
                }
            }
        }
        Self::new(objects, arrows, compose, inverse)
    }

    pub fn from_json(json: &ModelJson) -> Result<Self, GroupoidError> {
        Self::new(
            json.objects.clone(),
            json.arrows.iter().map(|a| (a.id.clone(), a.src.clone(), a.tgt.clone())).collect(),
            json.compose.iter().map(|[f, g, h]| (f.clone(), g.clone(), h.clone())).collect(),
            json.inverse.iter().map(|[f, g]| (f.clone(), g.clone())).collect(),
        )
    }

    pub fn to_json(&self) -> ModelJson {
        let n = self.arrows.len();
        let mut compose = Vec::new();
        for f in 0..n {
            for g in 0..n {
                if let Some(h) = self.compose[f * n + g] {
                    compose.push([self.arrow_name(f).into(), self.arrow_name(g).into(), self.arrow_name(h).into()]);
                }
            }
        }
        ModelJson {
            objects: self.objects.clone(),
            arrows: self
                .arrows
                .iter()
                .map(|a| ArrowJson {
                    id: a.name.clone(),
                    src: self.objects[a.src].clone(),
                    tgt: self.objects[a.tgt].clone(),
                })
                .collect(),
            compose,
            inverse: (0..n)
                .map(|f| [self.arrow_name(f).into(), self.arrow_name(self.inverse[f]).into()])
                .collect(),
            parts: Default::default(),
            equiv: Vec::new(),
            arrow_image: Vec::new(),
        }
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn object_name(&self, x: usize) -> &str {
        &self.objects[x]
    }

    pub fn arrow_name(&self, f: usize) -> &str {
        &self.arrows[f].name
    }

    pub fn object(&self, name: &str) -> Result<usize, GroupoidError> {
        self.object_index.get(name).copied().ok_or_else(|| GroupoidError::Unknown {
            kind: "object",
            name: name.to_string(),
        })
    }

    pub fn arrow(&self, name: &str) -> Result<usize, GroupoidError> {
        self.arrow_index.get(name).copied().ok_or_else(|| GroupoidError::Unknown {
            kind: "arrow",
            name: name.to_string(),
        })
    }

    pub fn source(&self, f: usize) -> usize {
        self.arrows[f].src
    }

    pub fn target(&self, f: usize) -> usize {
        self.arrows[f].tgt
    }

    pub fn identity(&self, x: usize) -> usize {
        self.identity[x]
    }

    pub fn is_identity(&self, f: usize) -> bool {
        self.identity[self.arrows[f].src] == f
    }

    pub fn inverse(&self, f: usize) -> usize {
        self.inverse[f]
    }

    pub fn compose(&self, f: usize, g: usize) -> Option<usize> {
        self.compose[f * self.arrows.len() + g]
    }

    pub fn all_arrows(&self) -> LiftResult {
        LiftResult {
            index: Vec::new(),
            objects: (0..self.objects.len()).collect(),
            arrows: (0..self.arrows.len()).collect(),
        }
    }

    pub fn identities_only(&self) -> LiftResult {
        LiftResult {
            index: Vec::new(),
            objects: (0..self.objects.len()).collect(),
            arrows: self.identity.iter().copied().collect(),
        }
    }
}

/// A set of arrows over a set of objects, meant to present a stack.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftResult {
    /// Stratum the presentation belongs to; empty for the whole cover.
    pub index: Vec<u32>,
    pub objects: BTreeSet<usize>,
    pub arrows: BTreeSet<usize>,
}

impl LiftResult {
    pub fn arrow_names(&self, g: &FiniteGroupoid) -> Vec<String> {
        self.arrows.iter().map(|&f| g.arrow_name(f).to_string()).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GroupoidReport {
    pub arrows: usize,
    pub objects: usize,
    /// Kept arrows with an endpoint outside the object set.
    pub stray_arrows: Vec<String>,
    pub missing_identities: Vec<String>,
    pub missing_inverses: Vec<String>,
    /// Composable kept pairs `(f, g, f then g)` whose composite was removed.
    pub open_compositions: Vec<[String; 3]>,
    pub passes: bool,
}

impl GroupoidReport {
    pub fn summary(&self) -> String {
        format!(
            "{} stray arrow(s), {} missing identit(ies), {} missing inverse(s), {} open composition(s)",
            self.stray_arrows.len(),
            self.missing_identities.len(),
            self.missing_inverses.len(),
            self.open_compositions.len()
        )
    }
}

/// Exhaustively checks that `kept` is a subgroupoid over its objects.
pub fn check_groupoid(g: &FiniteGroupoid, kept: &LiftResult) -> GroupoidReport {
    let mut r = GroupoidReport {
        arrows: kept.arrows.len(),
        objects: kept.objects.len(),
        ..Default::default()
    };
    for &f in &kept.arrows {
        if !kept.objects.contains(&g.source(f)) || !kept.objects.contains(&g.target(f)) {
            r.stray_arrows.push(g.arrow_name(f).to_string());
        }
        if !kept.arrows.contains(&g.inverse(f)) {
            r.missing_inverses.push(g.arrow_name(f).to_string());
        }
    }
    for &x in &kept.objects {
        if !kept.arrows.contains(&g.identity(x)) {
            r.missing_identities.push(g.object_name(x).to_string());
        }
    }
    for &f in &kept.arrows {
        for &h in &kept.arrows {
            if let Some(c) = g.compose(f, h) {
                if !kept.arrows.contains(&c) {
                    r.open_compositions.push([
                        g.arrow_name(f).to_string(),
                        g.arrow_name(h).to_string(),
                        g.arrow_name(c).to_string(),
                    ]);
                }
            }
        }
    }
    r.passes = r.stray_arrows.is_empty()
        && r.missing_identities.is_empty()
        && r.missing_inverses.is_empty()
        && r.open_compositions.is_empty();
    r
}
