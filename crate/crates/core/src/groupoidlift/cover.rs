//! Cover data of a local embedding over a finite groupoid, and the
//! presentations obtained by removing the images `S_pq` of `V_p ×_Y V_q`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use super::{check_groupoid, FiniteGroupoid, GroupoidError, LiftResult, ModelJson};
use crate::stratnet::{index_name, Index, StratumNetwork};

/// One component `V_l^a` of the cover of `Y`, embedded in the objects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Part {
    /// Label as written in the input, `"l"` or `"l/a"`.
    pub name: String,
    pub label: u32,
    pub sheet: String,
    pub tokens: Vec<usize>,
}

fn parse_label(name: &str) -> Result<(u32, String), GroupoidError> {
    let (l, a) = name.split_once('/').unwrap_or((name, ""));
    let label = l
        .parse::<u32>()
        .map_err(|_| GroupoidError::Cover(format!("part label `{name}` must start with an integer")))?;
    Ok((label, a.to_string()))
}

/// Cover data `V = ⊔ V_p → U` with the relation `V ×_Y V` and its image in `R`.
///
/// Loading checks that the images are anchored, respect composition, and
/// that every arrow leaving an anchor lifts to exactly one equivalent token,
/// which is the finite form of `V ≅ Y ×_X U`. Anchors are injective on each
/// part.
#[derive(Clone, Debug)]
pub struct EmbeddedCoverData {
    groupoid: FiniteGroupoid,
    token_names: Vec<String>,
    anchor: Vec<usize>,
    part_of: Vec<usize>,
    parts: Vec<Part>,
    class_members: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    /// Arrow from the class root's anchor to each token's anchor.
    from_root: Vec<usize>,
}

impl EmbeddedCoverData {
    pub fn new(
        groupoid: FiniteGroupoid,
        parts: Vec<(String, Vec<(String, String)>)>,
        equiv: Vec<(String, String)>,
        images: Vec<(String, String, String)>,
    ) -> Result<Self, GroupoidError> {
        let mut token_names = Vec::new();
        let mut token_index = HashMap::new();
        let mut anchor = Vec::new();
        let mut part_of = Vec::new();
        let mut part_list = Vec::new();
        let mut sorted = parts;
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (name, members) in sorted {
            let (label, sheet) = parse_label(&name)?;
            let p = part_list.len();
            let mut seen = BTreeSet::new();
            let mut tokens = Vec::new();
            for (token, obj) in members {
                let x = groupoid.object(&obj)?;
                if !seen.insert(x) {
                    return Err(GroupoidError::Cover(format!(
                        "part {name} has two tokens over object {obj}"
                    )));
                }
                if token_index.insert(token.clone(), token_names.len()).is_some() {
                    return Err(GroupoidError::Duplicate { kind: "token", name: token });
                }
                tokens.push(token_names.len());
                token_names.push(token);
                anchor.push(x);
                part_of.push(p);
            }
            part_list.push(Part {
                name,
                label,
                sheet,
                tokens,
            });
        }
        let tok = |name: &str| {
            token_index.get(name).copied().ok_or_else(|| GroupoidError::Unknown {
                kind: "token",
                name: name.to_string(),
            })
        };

        let n = token_names.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (v, w) in &equiv {
            let (a, b) = (find(&mut parent, tok(v)?), find(&mut parent, tok(w)?));
            parent[a.max(b)] = a.min(b);
        }
        let roots: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
        let mut class_ids: BTreeMap<usize, usize> = BTreeMap::new();
        let mut class_members: Vec<Vec<usize>> = Vec::new();
        let mut class_of = vec![0; n];
        for x in 0..n {
            let next = class_ids.len();
            let c = *class_ids.entry(roots[x]).or_insert(next);
            if c == class_members.len() {
                class_members.push(Vec::new());
            }
            class_members[c].push(x);
            class_of[x] = c;
        }

        let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut given = Vec::new();
        for (v, w, f) in &images {
            let (v, w, f) = (tok(v)?, tok(w)?, groupoid.arrow(f)?);
            if class_of[v] != class_of[w] {
                return Err(GroupoidError::Cover(format!(
                    "arrow image given for {} and {}, which are not equivalent",
                    token_names[v], token_names[w]
                )));
            }
            if groupoid.source(f) != anchor[v] || groupoid.target(f) != anchor[w] {
                return Err(GroupoidError::Cover(format!(
                    "image {} of ({}, {}) is not anchored at their objects",
                    groupoid.arrow_name(f),
                    token_names[v],
                    token_names[w]
                )));
            }
            edges[v].push((w, f));
            edges[w].push((v, groupoid.inverse(f)));
            given.push((v, w, f));
        }
        let mut from_root = vec![usize::MAX; n];
        for members in &class_members {
            let root = members[0];
            from_root[root] = groupoid.identity(anchor[root]);
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &(w, f) in &edges[v] {
                    if from_root[w] == usize::MAX {
                        from_root[w] = groupoid.compose(from_root[v], f).expect("anchored");
                        queue.push_back(w);
                    }
                }
            }
            if let Some(&lost) = members.iter().find(|&&m| from_root[m] == usize::MAX) {
                return Err(GroupoidError::Cover(format!(
                    "no chain of arrow images links {} to {}",
                    token_names[root], token_names[lost]
                )));
            }
        }
        let data = EmbeddedCoverData {
            groupoid,
            token_names,
            anchor,
            part_of,
            parts: part_list,
            class_members,
            class_of,
            from_root,
        };
        for (v, w, f) in given {
            if data.image(v, w) != f {
                return Err(GroupoidError::Cover(format!(
                    "arrow images do not respect composition at ({}, {})",
                    data.token_names[v], data.token_names[w]
                )));
            }
        }
        data.check_cartesian()?;
        Ok(data)
    }

    fn check_cartesian(&self) -> Result<(), GroupoidError> {
        let g = &self.groupoid;
        for v in 0..self.token_names.len() {
            let lifted: BTreeSet<usize> = self.class_members[self.class_of[v]]
                .iter()
                .map(|&w| self.image(v, w))
                .collect();
            let leaving: BTreeSet<usize> = (0..g.arrow_count())
                .filter(|&f| g.source(f) == self.anchor[v])
                .collect();
            if lifted.len() != self.class_members[self.class_of[v]].len() || lifted != leaving {
                return Err(GroupoidError::Cover(format!(
                    "arrows leaving {} do not lift uniquely to tokens equivalent to {}",
                    g.object_name(self.anchor[v]),
                    self.token_names[v]
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(json: &ModelJson) -> Result<Self, GroupoidError> {
        let g = FiniteGroupoid::from_json(json)?;
        let parts = json
            .parts
            .iter()
            .map(|(k, m)| (k.clone(), m.iter().map(|(t, o)| (t.clone(), o.clone())).collect()))
            .collect();
        let equiv = json.equiv.iter().map(|[v, w]| (v.clone(), w.clone())).collect();
        let images = json
            .arrow_image
            .iter()
            .map(|[v, w, f]| (v.clone(), w.clone(), f.clone()))
            .collect();
        Self::new(g, parts, equiv, images)
    }

    pub fn to_json(&self) -> ModelJson {
        let mut json = self.groupoid.to_json();
        for p in &self.parts {
            let members = p
                .tokens
                .iter()
                .map(|&t| (self.token_names[t].clone(), self.groupoid.object_name(self.anchor[t]).to_string()))
                .collect();
            json.parts.insert(p.name.clone(), members);
        }
        for members in &self.class_members {
            let root = members[0];
            for &w in &members[1..] {
                json.equiv.push([self.token_names[root].clone(), self.token_names[w].clone()]);
                json.arrow_image.push([
                    self.token_names[root].clone(),
                    self.token_names[w].clone(),
                    self.groupoid.arrow_name(self.image(root, w)).to_string(),
                ]);
            }
        }
        json
    }

    pub fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn part(&self, name: &str) -> Result<usize, GroupoidError> {
        self.parts
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| GroupoidError::Unknown {
                kind: "part",
                name: name.to_string(),
            })
    }

    pub fn labels(&self) -> BTreeSet<u32> {
        self.parts.iter().map(|p| p.label).collect()
    }

    pub fn token_count(&self) -> usize {
        self.token_names.len()
    }

    /// Objects carrying a token of some part.
    pub fn anchored_objects(&self) -> BTreeSet<usize> {
        self.anchor.iter().copied().collect()
    }

    /// Image in `R` of the equivalent pair `(v, w)`.
    fn image(&self, v: usize, w: usize) -> usize {
        let g = &self.groupoid;
        g.compose(g.inverse(self.from_root[v]), self.from_root[w])
            .expect("equivalent tokens")
    }

    /// `S_pq`: images of equivalent pairs with `v` in a part of `from`, `w` in a part of `to`.
    pub fn images_between(&self, from: &[usize], to: &[usize]) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &p in from {
            for &v in &self.parts[p].tokens {
                for &w in &self.class_members[self.class_of[v]] {
                    if to.contains(&self.part_of[w]) {
                        out.insert(self.image(v, w));
                    }
                }
            }
        }
        out
    }

    fn split(&self, keep: &str) -> Result<(Vec<usize>, Vec<usize>), GroupoidError> {
        let k = self.part(keep)?;
        let rest = (0..self.parts.len()).filter(|&p| p != k).collect();
        Ok((vec![k], rest))
    }

    /// `W_I^a`: objects carrying a token of part `(l, sheet)` for every `l ∈ I`,
    /// or of `(l, any sheet)` when `sheet` is `None`.
    fn stratum_objects(&self, index: &[u32], sheet: Option<&str>) -> BTreeSet<usize> {
        let mut objs: BTreeSet<usize> = (0..self.groupoid.object_count()).collect();
        for &l in index {
            let here: BTreeSet<usize> = self
                .parts
                .iter()
                .filter(|p| p.label == l && sheet.is_none_or(|s| p.sheet == s))
                .flat_map(|p| p.tokens.iter().map(|&t| self.anchor[t]))
                .collect();
            objs = objs.intersection(&here).copied().collect();
        }
        objs
    }
}

fn names(g: &FiniteGroupoid, set: &BTreeSet<usize>) -> String {
    let list: Vec<&str> = set.iter().map(|&f| g.arrow_name(f)).collect();
    list.join(", ")
}

/// `R′ = R ∖ (S₁₂ ∪ S₂₁ ∪ (S₂₂ ∖ S₁₁))`, with every identity put back.
///
/// `V₁` is the part named `keep`; all other parts together form `V₂`.
pub fn subtract_arrows(data: &EmbeddedCoverData, keep: &str) -> Result<LiftResult, GroupoidError> {
    let g = &data.groupoid;
    let (one, two) = data.split(keep)?;
    let s11 = data.images_between(&one, &one);
    let s12 = data.images_between(&one, &two);
    let s21 = data.images_between(&two, &one);
    let s22 = data.images_between(&two, &two);
    let crossing: BTreeSet<usize> = s12.union(&s21).copied().collect();
    let clash: BTreeSet<usize> = s11
        .intersection(&crossing)
        .copied()
        .filter(|&f| !g.is_identity(f))
        .collect();
    if !clash.is_empty() {
        return Err(GroupoidError::Ambiguous {
            arrow: names(g, &clash),
            kept: "S11".into(),
            removed: "S12 or S21".into(),
        });
    }
    let mut removed = crossing;
    removed.extend(s22.difference(&s11));
    let mut arrows: BTreeSet<usize> = (0..g.arrow_count()).filter(|f| !removed.contains(f)).collect();
    arrows.extend((0..g.object_count()).map(|x| g.identity(x)));
    Ok(LiftResult {
        index: Vec::new(),
        objects: (0..g.object_count()).collect(),
        arrows,
    })
}

/// Composable pairs in `S₂₂ ∖ (S₁₁ ∪ Im e)` whose composite leaves that set
/// and is not an identity; empty exactly when the set is closed under composition.
pub fn etale_on_image(data: &EmbeddedCoverData, keep: &str) -> Result<Vec<[String; 3]>, GroupoidError> {
    let g = &data.groupoid;
    let (one, two) = data.split(keep)?;
    let s11 = data.images_between(&one, &one);
    let t: BTreeSet<usize> = data
        .images_between(&two, &two)
        .into_iter()
        .filter(|f| !s11.contains(f) && !g.is_identity(*f))
        .collect();
    let mut out = Vec::new();
    for &f in &t {
        for &h in &t {
            if let Some(c) = g.compose(f, h) {
                if !t.contains(&c) && !g.is_identity(c) {
                    out.push([
                        g.arrow_name(f).to_string(),
                        g.arrow_name(h).to_string(),
                        g.arrow_name(c).to_string(),
                    ]);
                }
            }
        }
    }
    Ok(out)
}

/// How the two unions in the stratum presentation range over pairs of parts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftReading {
    /// Remove `S_pq` for `p ≠ q` when the label of `p` lies in `I`, or when
    /// neither label does, exactly as the ordered pairs are written. Can
    /// keep an arrow while removing its inverse.
    Literal,
    /// Remove `S_pq` together with `S_qp` under the same conditions; this is
    /// `R′_∅` restricted to `W_I` and always a groupoid.
    #[default]
    Symmetric,
}

/// The presentations `R′_I ⇉ W_I` for every index of `poset`, built in
/// decreasing order; each must pass [`check_groupoid`].
pub fn iterated_lift(
    data: &EmbeddedCoverData,
    poset: &StratumNetwork,
    reading: LiftReading,
) -> Result<BTreeMap<Index, LiftResult>, GroupoidError> {
    let g = &data.groupoid;
    let labels = data.labels();
    let mut out = BTreeMap::new();
    for s in poset.strata().iter().rev() {
        let i = &s.index;
        if let Some(l) = i.iter().find(|l| !labels.contains(l)) {
            return Err(GroupoidError::Cover(format!(
                "index {} uses label {l}, which no part carries",
                index_name(i)
            )));
        }
        let objects = data.stratum_objects(i, None);
        let inside = |l: u32| i.contains(&l);
        let mut removed = BTreeSet::new();
        for (p, pp) in data.parts.iter().enumerate() {
            for (q, qq) in data.parts.iter().enumerate() {
                if p == q {
                    continue;
                }
                let hit = |a: u32, b: u32| inside(a) || (!inside(a) && !inside(b));
                let remove = match reading {
                    LiftReading::Literal => hit(pp.label, qq.label),
                    LiftReading::Symmetric => hit(pp.label, qq.label) || hit(qq.label, pp.label),
                };
                if remove {
                    removed.extend(data.images_between(&[p], &[q]));
                }
            }
        }
        let mut arrows: BTreeSet<usize> = (0..g.arrow_count())
            .filter(|&f| objects.contains(&g.source(f)) && objects.contains(&g.target(f)))
            .filter(|f| !removed.contains(f))
            .collect();
        arrows.extend(objects.iter().map(|&x| g.identity(x)));
        let result = LiftResult {
            index: i.clone(),
            objects,
            arrows,
        };
        let report = check_groupoid(g, &result);
        if !report.passes {
            return Err(GroupoidError::Construction {
                index: index_name(i),
                summary: report.summary(),
            });
        }
        out.insert(i.clone(), result);
    }
    Ok(out)
}

/// Components of the fiber product over `V_J^a`, enumerated on the model and
/// predicted from chain counts in the poset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberCounts {
    /// Copies of some `V_K^a`, one per chain from `K` down to `J`.
    pub enumerated_copies: u128,
    pub predicted_copies: u128,
    /// Points of those copies.
    pub enumerated_points: u128,
    pub predicted_points: u128,
    pub matches: bool,
}

/// Counts the pieces `V_K^a`, `K` of the rank of `i`, `K ⊇ j`, making up
/// `Y_i ×_{Y_j} V_j^a`: once by growing `j` one label at a time on the
/// model, once as `Σ_K N(K → j) · |V_K^a|` from the poset.
pub fn fiber_decomposition_counts(
    data: &EmbeddedCoverData,
    poset: &StratumNetwork,
    i: &[u32],
    j: &[u32],
    sheet: &str,
) -> Result<FiberCounts, GroupoidError> {
    poset.count_chains(i, j)?;
    let k = poset.rank_of(i)?;
    let steps = k - poset.rank_of(j)?;
    let labels: Vec<u32> = data.labels().into_iter().collect();
    let carries = |x: usize, l: u32| data.stratum_objects(&[l], Some(sheet)).contains(&x);

    let mut chains: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut points: u128 = 0;
    for x in data.stratum_objects(j, Some(sheet)) {
        let mut stack: Vec<Vec<u32>> = vec![Vec::new()];
        while let Some(seq) = stack.pop() {
            if seq.len() == steps {
                chains.insert(seq);
                points += 1;
                continue;
            }
            for &l in &labels {
                if !j.contains(&l) && !seq.contains(&l) && carries(x, l) {
                    let mut next = seq.clone();
                    next.push(l);
                    stack.push(next);
                }
            }
        }
    }

    let mut predicted_copies = 0;
    let mut predicted_points = 0;
    for upper in poset.level(k) {
        if !j.iter().all(|x| upper.contains(x)) {
            continue;
        }
        let size = data.stratum_objects(upper, Some(sheet)).len() as u128;
        if size == 0 {
            continue;
        }
        let n = poset.count_chains(upper, j)?;
        predicted_copies += n;
        predicted_points += n * size;
    }
    let enumerated_copies = chains.len() as u128;
    Ok(FiberCounts {
        enumerated_copies,
        predicted_copies,
        enumerated_points: points,
        predicted_points,
        matches: enumerated_copies == predicted_copies && points == predicted_points,
    })
}
