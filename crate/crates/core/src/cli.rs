//! Batch front-end: reads job and model files, runs one computation and
//! renders canonical JSON or plain text.
//!
//! Exit codes: 0 success, 2 input error, 3 resource guard, 4 internal
//! invariant failure. Errors are reported on stderr as
//! `{"error": …, "path": …, "reason": …}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::gring::{
    parse_rational, GradedPoly, GringError, IntegralJson, Monomial, PolyJson, Rational, RingSpec, RingSpecJson,
};
use crate::groupoidlift::{
    check_groupoid, etale_on_image, fiber_decomposition_counts, iterated_lift, subtract_arrows, EmbeddedCoverData,
    FiniteGroupoid, GroupoidError, LiftReading, LiftResult, ModelJson,
};
use crate::stablemaps::{
    check_budget, Admissibility, ClassContext, CurveModel, MarkSet, StableMapsError, DEFAULT_MAX_DEGREE,
};
use crate::stratnet::{
    compute_weights, index_name, verify_section_identity, DecompositionData, DecompositionJson, NetworkJson,
    StratnetError, StratumNetwork,
};
use crate::wblow::{self, BundleJson, WblowError, WeightedBundleData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "stackchern", version, about = "Exact Chern classes, stratum networks and groupoid models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Truncation degree, overriding the one in the input.
    #[arg(long, global = true)]
    pub cap: Option<u32>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Total Chern class of a weighted projective fibration.
    Fibration { job: PathBuf },
    /// Total Chern class of a weighted blow-up.
    Blowup { job: PathBuf },
    /// Total Chern class of a stratum of the stable-map tower.
    Stablemaps {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        d: u32,
        /// Blow-up level of the stratum.
        #[arg(long, default_value_t = 0)]
        k: u32,
        /// A subset of the stratum as comma-separated labels, e.g. `1,2,m2`;
        /// repeatable. Defaults to the marked singletons.
        #[arg(long)]
        nested: Vec<String>,
        #[arg(long)]
        include_full_set_h: bool,
        /// Largest degree accepted by the generator budget.
        #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
        max_degree: u32,
        /// Also run the iterated blow-up and compare.
        #[arg(long)]
        iterated: bool,
        #[arg(long)]
        parallel: bool,
    },
    /// Checks a curve model against the partition and splitting-type rules.
    Curve {
        model: PathBuf,
        /// Subsets of the degree labels, comma separated; repeatable.
        #[arg(long)]
        nested: Vec<String>,
        #[arg(long, default_value_t = 0)]
        k: u32,
    },
    /// Chains, weights, identities and optional decompositions of a network.
    Network {
        network: PathBuf,
        /// Expected factor in the section identity.
        #[arg(long, default_value = "1")]
        degree: String,
        /// Decomposition data with classes to split.
        #[arg(long)]
        chow: Option<PathBuf>,
    },
    /// Subtraction and lift checks on a finite groupoid model.
    Groupoid {
        model: PathBuf,
        /// Part kept as `V₁`; defaults to the first part.
        #[arg(long)]
        keep: Option<String>,
        /// Poset of strata for the iterated presentations.
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "symmetric")]
        reading: Reading,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Reading {
    Literal,
    Symmetric,
}

impl From<Reading> for LiftReading {
    fn from(r: Reading) -> Self {
        match r {
            Reading::Literal => LiftReading::Literal,
            Reading::Symmetric => LiftReading::Symmetric,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CliError {
    #[serde(skip)]
    pub code: i32,
    pub error: &'static str,
    pub path: String,
    pub reason: String,
}

impl CliError {
    fn input(path: impl Into<String>, reason: impl ToString) -> Self {
        CliError {
            code: 2,
            error: "input",
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    fn guard(path: impl Into<String>, reason: impl ToString) -> Self {
        CliError {
            code: 3,
            error: "resource",
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    fn internal(path: impl Into<String>, reason: impl ToString) -> Self {
        CliError {
            code: 4,
            error: "internal",
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain fields")
    }
}

fn ring_error(path: &str, e: GringError) -> CliError {
    match e {
        GringError::NonTerminating(_) => CliError::guard(path, e),
        _ => CliError::input(path, e),
    }
}

fn maps_error(path: &str, e: StableMapsError) -> CliError {
    match e {
        StableMapsError::GeneratorBudget { .. } | StableMapsError::Ring(GringError::NonTerminating(_)) => {
            CliError::guard(path, e)
        }
        StableMapsError::Parameters(_)
        | StableMapsError::NotNested(_)
        | StableMapsError::NotAdmissible(_)
        | StableMapsError::UnknownLabel(_) => CliError::input(path, e),
        _ => CliError::internal(path, e),
    }
}

/// Result of one job in both renderings.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub json: Value,
    pub text: String,
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("json value");
                s.push('\n');
                s
            }
            Format::Text => self.text.clone(),
        }
    }
}

/// Reads `path` as strict JSON; the error path names the failing field.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(&shown, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        let where_ = if at == "." { shown.clone() } else { format!("{shown}#{at}") };
        CliError::input(where_, e.into_inner())
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FibrationJob {
    /// Base ring; the fibration generator is appended to it.
    ring: RingSpecJson,
    bundle: BundleJson,
    #[serde(default)]
    base_class: Option<PolyJson>,
    #[serde(default = "default_tau")]
    tau: String,
    /// Integrals of top-degree monomials of the fibration ring.
    #[serde(default)]
    integral: Option<Vec<IntegralJson>>,
}

fn default_tau() -> String {
    "tau".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlowupJob {
    /// Ring of the blow-up, including the exceptional class.
    ring: RingSpecJson,
    bundle: BundleJson,
    #[serde(default)]
    base_class: Option<PolyJson>,
    #[serde(default = "default_e")]
    exceptional: String,
}

fn default_e() -> String {
    "E".into()
}

fn with_cap(mut json: RingSpecJson, cap: Option<u32>) -> RingSpecJson {
    if let Some(c) = cap {
        json.cap = c;
    }
    json
}

fn class_summary(c: &GradedPoly, ring: &RingSpec, path: &str) -> Result<(Value, String), CliError> {
    let mut parts = BTreeMap::new();
    let mut text = String::new();
    for k in 1..=2u32.min(c.cap()) {
        let p = c.degree_part(k).map_err(|e| CliError::internal(path, e))?;
        writeln!(text, "c{k} = {p}").unwrap();
        parts.insert(format!("c{k}"), Value::String(p.to_string()));
    }
    if ring.integral_table().is_some() {
        let v = ring.integrate(c).map_err(|e| ring_error(path, e))?;
        writeln!(text, "integral = {v}").unwrap();
        parts.insert("integral".into(), Value::String(v.to_string()));
    }
    Ok((Value::Object(parts.into_iter().collect()), text))
}

fn poly_output(command: &str, class: &GradedPoly, ring: &RingSpec, path: &str) -> Result<Output, CliError> {
    let nf = ring.normal_form(class).map_err(|e| ring_error(path, e))?;
    let (summary, summary_text) = class_summary(&nf, ring, path)?;
    let json = json!({
        "command": command,
        "class": class.to_json(),
        "normal_form": nf.to_json(),
        "text": nf.to_string(),
        "summary": summary,
    });
    let text = format!("c = {nf}\n{summary_text}");
    Ok(Output { json, text })
}

fn run_fibration(job_path: &Path, cap: Option<u32>) -> Result<Output, CliError> {
    let path = job_path.display().to_string();
    let job: FibrationJob = read_json(job_path)?;
    let base = RingSpec::from_json(&with_cap(job.ring, cap)).map_err(|e| ring_error(&path, e))?;
    let cap = base.cap();
    let lift_err = |e: WblowError| match e {
        WblowError::Ring(g) => ring_error(&path, g),
        other => CliError::input(&path, other),
    };
    // The bundle and base class are read over the base ring: the fibration
    // ring's generators are those plus `tau`.
    let base_u = base.universe().clone();
    let data_base = WeightedBundleData::from_json(&base_u, cap, &job.bundle).map_err(lift_err)?;
    let mut ring = wblow::fibration_ring(&base, &data_base, &job.tau, cap).map_err(lift_err)?;
    let u = ring.universe().clone();
    if let Some(entries) = &job.integral {
        let mut table = BTreeMap::new();
        for e in entries {
            let m = Monomial::from_json(&u, &e.mono).map_err(|e| ring_error(&path, e))?;
            table.insert(m, parse_rational(&e.value).map_err(|e| ring_error(&path, e))?);
        }
        ring = RingSpec::new(&u, cap, ring.rules().to_vec(), Some(table)).map_err(|e| ring_error(&path, e))?;
    }
    let data = WeightedBundleData::from_json(&u, cap, &job.bundle).map_err(lift_err)?;
    let base_class = match &job.base_class {
        Some(p) => GradedPoly::from_json(&u, Some(cap), p).map_err(|e| ring_error(&path, e))?,
        None => GradedPoly::one(&u, cap),
    };
    let tau = GradedPoly::generator(&u, cap, &job.tau).map_err(|e| ring_error(&path, e))?;
    let c = wblow::fibration_chern(&base_class, &data, &tau).map_err(lift_err)?;
    poly_output("fibration", &c, &ring, &path)
}

fn run_blowup(job_path: &Path, cap: Option<u32>) -> Result<Output, CliError> {
    let path = job_path.display().to_string();
    let job: BlowupJob = read_json(job_path)?;
    let ring = RingSpec::from_json(&with_cap(job.ring, cap)).map_err(|e| ring_error(&path, e))?;
    let (u, cap) = (ring.universe().clone(), ring.cap());
    let lift_err = |e: WblowError| match e {
        WblowError::Ring(g) => ring_error(&path, g),
        other => CliError::input(&path, other),
    };
    let data = WeightedBundleData::from_json(&u, cap, &job.bundle).map_err(lift_err)?;
    let base_class = match &job.base_class {
        Some(p) => GradedPoly::from_json(&u, Some(cap), p).map_err(|e| ring_error(&path, e))?,
        None => GradedPoly::one(&u, cap),
    };
    let e = GradedPoly::generator(&u, cap, &job.exceptional).map_err(|e| ring_error(&path, e))?;
    // A center with no normal directions is not blown up at all.
    let c = if data.is_empty() {
        base_class
    } else {
        wblow::blowup_chern(&base_class, &data, &e).map_err(lift_err)?
    };
    poly_output("blowup", &c, &ring, &path)
}

#[allow(clippy::too_many_arguments)]
fn run_stablemaps(
    n: u32,
    m: u32,
    d: u32,
    k: u32,
    nested: &[String],
    include_full_set_h: bool,
    max_degree: u32,
    iterated: bool,
    parallel: bool,
    cap: Option<u32>,
) -> Result<Output, CliError> {
    let path = "stablemaps";
    let err = |e| maps_error(path, e);
    check_budget(d, m, max_degree).map_err(err)?;
    let rule = Admissibility {
        include_full_set: include_full_set_h,
    };
    let marks = MarkSet::new(d, m).map_err(err)?;
    let cap = cap.unwrap_or_else(|| crate::stablemaps::ambient_dimension(n, m, d));
    let stratum = if nested.is_empty() {
        marks.marked_singletons()
    } else {
        nested
            .iter()
            .map(|s| marks.parse_subset(&s.split(',').map(str::trim).collect::<Vec<_>>()))
            .collect::<Result<Vec<u32>, _>>()
            .map_err(err)?
    };
    let ctx = ClassContext::new(marks, n, stratum, cap, rule).map_err(err)?.with_parallel(parallel);
    let c = ctx.chern_stratum_closed_form(k).map_err(err)?;
    let c1: BTreeMap<String, String> =
        c.linear_coefficients().into_iter().map(|(g, v)| (g, v.to_string())).collect();
    let generators: Vec<String> = ctx.universe().generators().iter().map(|g| g.name.clone()).collect();
    let stratum_names: Vec<String> = ctx.nested().iter().map(|&h| marks.subset_name(h)).collect();
    let mut json = json!({
        "command": "stablemaps",
        "n": n, "m": m, "d": d, "k": k, "cap": cap,
        "stratum": stratum_names,
        "generators": generators,
        "class": c.to_json(),
        "text": c.to_string(),
        "c1": c1,
    });
    let mut text = format!("c = {c}\n");
    for (g, v) in &c1 {
        writeln!(text, "c1[{g}] = {v}").unwrap();
    }
    if iterated {
        let it = ctx.chern_iterated(k).map_err(err)?;
        let agrees = it == c;
        json["iterated_agrees"] = Value::Bool(agrees);
        writeln!(text, "iterated agrees: {agrees}").unwrap();
        if !agrees {
            return Err(CliError::internal(path, "iterated blow-up differs from the closed form"));
        }
    }
    Ok(Output { json, text })
}

fn run_curve(model_path: &Path, nested: &[String], k: u32) -> Result<Output, CliError> {
    let path = model_path.display().to_string();
    let model: CurveModel = read_json(model_path)?;
    let partition = model.validate_partition().map_err(|e| CliError::input(&path, e))?;
    let sets: Vec<Vec<u32>> = nested
        .iter()
        .map(|s| {
            s.split(',')
                .map(|x| x.trim().parse::<u32>().map_err(|_| CliError::input(&path, format!("bad label `{x}`"))))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let splitting = model.validate_splitting_type(&sets, k).map_err(|e| CliError::input(&path, e))?;
    let mut text = String::new();
    for (name, r) in [("partition", &partition), ("splitting type", &splitting)] {
        writeln!(text, "{name}: {}", if r.valid { "valid" } else { "invalid" }).unwrap();
        for v in &r.violations {
            writeln!(text, "  {}: {}", v.condition, v.detail).unwrap();
        }
    }
    let json = json!({
        "command": "curve",
        "degree": model.total_degree(),
        "partition": partition,
        "splitting_type": splitting,
    });
    Ok(Output { json, text })
}

fn run_network(net_path: &Path, degree: &str, chow: Option<&Path>) -> Result<Output, CliError> {
    let path = net_path.display().to_string();
    let json_net: NetworkJson = read_json(net_path)?;
    let net = StratumNetwork::from_json(&json_net).map_err(|e| CliError::input(&path, e))?;
    let d = parse_rational(degree).map_err(|e| CliError::input("--degree", e))?;
    let internal = |e: StratnetError| CliError::internal(&path, e);

    let weights = compute_weights(&net);
    let ratio = net.degree_ratio_sweep();
    let homogeneity = net.homogeneity();
    let mut sections = Vec::new();
    for s in net.strata() {
        sections.push(verify_section_identity(&net, &weights.table, &s.index, &d).map_err(internal)?);
    }
    let mut text = format!("{net}");
    writeln!(text, "weights:").unwrap();
    for (i, w) in weights.table.iter() {
        writeln!(text, "  w{} = {w}", index_name(i)).unwrap();
    }
    writeln!(
        text,
        "weight-degree identity: {} of {} checks fail",
        weights.failures.len(),
        weights.checked
    )
    .unwrap();
    writeln!(text, "degree ratio: {} of {} triples fail", ratio.failures.len(), ratio.checked).unwrap();
    for f in &ratio.failures {
        let lhs = f.lhs.as_ref().map_or("undefined".to_string(), ToString::to_string);
        writeln!(
            text,
            "  {} ⊇ {} ⊇ {}: {lhs} vs {}",
            index_name(&f.upper),
            index_name(&f.middle),
            index_name(&f.lower),
            f.rhs
        )
        .unwrap();
    }
    writeln!(text, "homogeneous: {}", homogeneity.homogeneous).unwrap();
    for v in &homogeneity.violations {
        writeln!(text, "  {v}").unwrap();
    }
    for s in &sections {
        writeln!(text, "section identity over {}: {}", index_name(&s.base), if s.holds { "holds" } else { "fails" })
            .unwrap();
    }
    let chains: BTreeMap<String, Value> = net
        .strata()
        .iter()
        .flat_map(|k| net.strata().iter().map(move |j| (k, j)))
        .filter(|(k, j)| net.reaches(&k.index, &j.index).unwrap_or(false) && k.index != j.index)
        .map(|(k, j)| {
            let key = format!("{} > {}", index_name(&k.index), index_name(&j.index));
            let count = net.count_chains(&k.index, &j.index).expect("reachable");
            let deg = net.total_degree(&k.index, &j.index).expect("reachable");
            (key, json!({"chains": count.to_string(), "degree": deg.to_string()}))
        })
        .collect();
    let mut out = json!({
        "command": "network",
        "strata": net.len(),
        "top_rank": net.top_rank(),
        "chains": chains,
        "weights": weights.table.to_named(),
        "weight_degree": {"checked": weights.checked, "failures": weights.failures},
        "degree_ratio": ratio,
        "homogeneity": homogeneity,
        "section_identity": sections,
    });
    if let Some(chow_path) = chow {
        let cpath = chow_path.display().to_string();
        let dj: DecompositionJson = read_json(chow_path)?;
        let data = DecompositionData::from_json(net.clone(), &dj).map_err(|e| CliError::input(&cpath, e))?;
        let mut results = Vec::new();
        for c in &dj.classes {
            let mut idx = c.index.clone();
            idx.sort_unstable();
            let alpha = c
                .class
                .iter()
                .map(|x| parse_rational(x))
                .collect::<Result<Vec<Rational>, _>>()
                .map_err(|e| CliError::input(&cpath, e))?;
            let terms = data.decompose(&idx, &alpha).map_err(|e| CliError::input(&cpath, e))?;
            let back = data.recompose(&idx, &terms).map_err(|e| CliError::internal(&cpath, e))?;
            if back != alpha {
                return Err(CliError::internal(&cpath, format!("decomposition at {} does not recompose", index_name(&idx))));
            }
            writeln!(text, "decomposition of a class at {}:", index_name(&idx)).unwrap();
            let shown: Vec<Value> = terms
                .iter()
                .map(|t| {
                    let coords: Vec<String> = t.class.iter().map(ToString::to_string).collect();
                    writeln!(text, "  {}: [{}]", index_name(&t.index), coords.join(", ")).unwrap();
                    json!({"index": index_name(&t.index), "class": coords})
                })
                .collect();
            results.push(json!({"index": index_name(&idx), "terms": shown}));
        }
        out["decompositions"] = Value::Array(results);
    }
    Ok(Output { json: out, text })
}

fn lift_json(g: &FiniteGroupoid, r: &LiftResult) -> Value {
    let objects: Vec<&str> = r.objects.iter().map(|&x| g.object_name(x)).collect();
    let report = check_groupoid(g, r);
    json!({
        "index": index_name(&r.index),
        "objects": objects,
        "arrows": r.arrow_names(g),
        "check": report,
    })
}

fn run_groupoid(model_path: &Path, keep: Option<&str>, net_path: Option<&Path>, reading: LiftReading) -> Result<Output, CliError> {
    let path = model_path.display().to_string();
    let model: ModelJson = read_json(model_path)?;
    let input = |e: GroupoidError| CliError::input(&path, e);
    let g = FiniteGroupoid::from_json(&model).map_err(input)?;
    let full = check_groupoid(&g, &g.all_arrows());
    let mut text = format!(
        "groupoid: {} objects, {} arrows, axioms {}\n",
        g.object_count(),
        g.arrow_count(),
        if full.passes { "pass" } else { "fail" }
    );
    let mut out = json!({
        "command": "groupoid",
        "objects": g.object_count(),
        "arrows": g.arrow_count(),
        "axioms": full,
    });
    if model.parts.is_empty() {
        return Ok(Output { json: out, text });
    }
    let data = EmbeddedCoverData::from_json(&model).map_err(input)?;
    let keep = keep.map_or_else(|| data.parts()[0].name.clone(), str::to_string);
    let etale = etale_on_image(&data, &keep).map_err(input)?;
    let r = subtract_arrows(&data, &keep).map_err(input)?;
    let report = check_groupoid(&g, &r);

    // Outside the image of the cover nothing may change.
    let anchored = data.anchored_objects();
    let outside = |f: &usize| !anchored.contains(&g.source(*f)) && !anchored.contains(&g.target(*f));
    let untouched = (0..g.arrow_count()).filter(outside).all(|f| r.arrows.contains(&f));
    let inverses = r.arrows.iter().all(|&f| r.arrows.contains(&g.inverse(f)));
    writeln!(text, "subtraction keeping {keep}: {} arrows, groupoid {}", r.arrows.len(), if report.passes { "passes" } else { "fails" }).unwrap();
    writeln!(text, "  {}", report.summary()).unwrap();
    writeln!(text, "  closed on the image: {}", etale.is_empty()).unwrap();
    writeln!(text, "  unchanged outside the image: {untouched}").unwrap();
    out["subtraction"] = json!({
        "keep": keep,
        "result": lift_json(&g, &r),
        "etale_on_image_violations": etale,
        "unchanged_outside_image": untouched,
        "inverses_survive": inverses,
    });

    let bottom_only;
    let poset = match net_path {
        Some(p) => {
            let nj: NetworkJson = read_json(p)?;
            bottom_only = false;
            StratumNetwork::from_json(&nj).map_err(|e| CliError::input(p.display().to_string(), e))?
        }
        None => {
            bottom_only = true;
            StratumNetwork::new(vec![(vec![], 0)], vec![]).expect("bottom alone")
        }
    };
    match iterated_lift(&data, &poset, reading) {
        Ok(lifts) => {
            let shown: Vec<Value> = lifts.values().map(|r| lift_json(&g, r)).collect();
            for r in lifts.values() {
                writeln!(text, "presentation over {}: {} objects, {} arrows", index_name(&r.index), r.objects.len(), r.arrows.len()).unwrap();
            }
            out["lifts"] = Value::Array(shown);
        }
        Err(GroupoidError::Construction { index, summary }) => {
            writeln!(text, "presentation over {index} is not a groupoid: {summary}").unwrap();
            out["lifts"] = json!({"failed_at": index, "summary": summary});
        }
        Err(e) => return Err(input(e)),
    }
    if !bottom_only {
        let sheets: std::collections::BTreeSet<&str> = data.parts().iter().map(|p| p.sheet.as_str()).collect();
        let mut counts = Vec::new();
        for i in poset.strata() {
            for j in poset.strata() {
                if !poset.reaches(&i.index, &j.index).unwrap_or(false) {
                    continue;
                }
                for &sheet in &sheets {
                    let c = fiber_decomposition_counts(&data, &poset, &i.index, &j.index, sheet).map_err(input)?;
                    if !c.matches {
                        writeln!(text, "fiber count mismatch over {} → {} sheet `{sheet}`", index_name(&i.index), index_name(&j.index)).unwrap();
                    }
                    counts.push(json!({
                        "upper": index_name(&i.index),
                        "lower": index_name(&j.index),
                        "sheet": sheet,
                        "counts": c,
                    }));
                }
            }
        }
        out["fiber_counts"] = Value::Array(counts);
    }
    Ok(Output { json: out, text })
}

/// Runs the parsed command.
pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Fibration { job } => run_fibration(job, cli.cap),
        Command::Blowup { job } => run_blowup(job, cli.cap),
        Command::Stablemaps {
            n,
            m,
            d,
            k,
            nested,
            include_full_set_h,
            max_degree,
            iterated,
            parallel,
        } => run_stablemaps(*n, *m, *d, *k, nested, *include_full_set_h, *max_degree, *iterated, *parallel, cli.cap),
        Command::Curve { model, nested, k } => run_curve(model, nested, *k),
        Command::Network { network, degree, chow } => run_network(network, degree, chow.as_deref()),
        Command::Groupoid {
            model,
            keep,
            network,
            reading,
        } => run_groupoid(model, keep.as_deref(), network.as_deref(), (*reading).into()),
    }
}

/// Parses `args`, runs the job, writes the result and returns the exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let err = CliError::input("arguments", e.to_string().trim());
            let _ = writeln!(stderr, "{}", err.to_json());
            return err.code;
        }
    };
    let result = run(&cli).and_then(|o| {
        let rendered = o.render(cli.format);
        match &cli.out {
            Some(p) => std::fs::write(p, rendered).map_err(|e| CliError::input(p.display().to_string(), e)),
            None => stdout
                .write_all(rendered.as_bytes())
                .map_err(|e| CliError::internal("stdout", e)),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(std::iter::once("stackchern").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.display().to_string()
    }

    #[test]
    fn stablemaps_table() {
        let (code, out, _) = run_args(&["stablemaps", "--n", "1", "--m", "1", "--d", "2"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["c1"]["H"], "6");
        let (_, out, _) = run_args(&["stablemaps", "--n", "1", "--m", "1", "--d", "1"]);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["generators"], json!(["H", "psi"]));
    }

    #[test]
    fn budget_guard_exits_three() {
        let (code, _, err) = run_args(&["stablemaps", "--n", "1", "--m", "1", "--d", "5"]);
        assert_eq!(code, 3);
        let v: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "resource");
    }

    #[test]
    fn bad_json_exits_two_with_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "job.json", r#"{"ring": {"generators": [], "cap": "x"}, "bundle": {"blocks": []}}"#);
        let (code, _, err) = run_args(&["blowup", &p]);
        assert_eq!(code, 2);
        let v: Value = serde_json::from_str(err.trim()).unwrap();
        assert!(v["path"].as_str().unwrap().ends_with("#ring.cap"), "{v}");
        let (code, _, _) = run_args(&["network", "/nonexistent/net.json"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_args(&["stablemaps", "--bogus"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn network_weights() {
        let dir = tempfile::tempdir().unwrap();
        let net = StratumNetwork::new(
            vec![(vec![], 0), (vec![1], 1), (vec![2], 1)],
            vec![(vec![1], vec![], crate::gring::int(1)), (vec![2], vec![], crate::gring::int(1))],
        )
        .unwrap();
        let p = write(&dir, "net.json", &serde_json::to_string(&net.to_json()).unwrap());
        let (code, out, _) = run_args(&["network", &p]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["weights"], json!({"{}": "1", "{1}": "1/2", "{2}": "1/2"}));
        let (code, text, _) = run_args(&["network", &p, "--format", "text"]);
        assert_eq!(code, 0);
        assert!(text.contains("w{1} = 1/2"));
    }

    #[test]
    fn groupoid_full_model_passes() {
        let dir = tempfile::tempdir().unwrap();
        let g = FiniteGroupoid::action_groupoid(2, &[2, 1]).unwrap();
        let p = write(&dir, "g.json", &serde_json::to_string(&g.to_json()).unwrap());
        let (code, out, _) = run_args(&["groupoid", &p]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["axioms"]["passes"], true);
    }
}
