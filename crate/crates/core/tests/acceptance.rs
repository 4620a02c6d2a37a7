//! Acceptance run: one PASS/FAIL line per criterion, with pinned time limits.
//!
//! Run with `cargo test -p stackchern --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::{json, Value};
use stackchern::gring::{int, rat, Generator, GradedPoly, Monomial, Rational, RingSpec, Universe};
use stackchern::groupoidlift::models::suite;
use stackchern::groupoidlift::{check_groupoid, iterated_lift, subtract_arrows, LiftReading};
use stackchern::stablemaps::{chern_m0m, Admissibility, ClassContext, MarkSet, DEFAULT_MAX_DEGREE};
use stackchern::stratnet::{compute_weights, index_name, verify_section_identity, StratumNetwork};
use stackchern::wblow::{blowup_chern, fibration_chern, Block, WeightedBundleData};

type Check = Result<(bool, String, Value), String>;

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn universe(names: &[&str]) -> Arc<Universe> {
    Universe::new(names.iter().map(|n| Generator::new(*n, 1)).collect()).expect("valid generators")
}

fn integral_table(u: &Universe, entries: &[(&[(&str, u32)], Rational)]) -> BTreeMap<Monomial, Rational> {
    entries
        .iter()
        .map(|(parts, v)| {
            let pairs = parts.iter().map(|(n, e)| (u.index_of(n).expect("known generator"), *e));
            (Monomial::from_exponents(u, pairs), v.clone())
        })
        .collect()
}

fn blowup_point_in_plane(_parallel: bool) -> Check {
    let u = universe(&["H", "E"]);
    let g = |n| GradedPoly::generator(&u, 2, n).map_err(err);
    let (h, e) = (g("H")?, g("E")?);
    let base = GradedPoly::one_plus_pow(&h, 3).map_err(err)?;
    let data = WeightedBundleData::new(vec![Block::trivial(&u, 2, 1, 2)]).map_err(err)?;
    let got = blowup_chern(&base, &data, &e).map_err(err)?;
    let expected = &(&base * &GradedPoly::one_plus_pow(&e, 1).map_err(err)?)
        * &GradedPoly::one_plus_pow(&-&e, 2).map_err(err)?;
    let c1 = got.degree_part(1).map_err(err)?;
    let table = integral_table(&u, &[(&[("H", 2)], int(1)), (&[("E", 2)], int(-1)), (&[("H", 1), ("E", 1)], int(0))]);
    let ring = RingSpec::new(&u, 2, vec![], Some(table)).map_err(err)?;
    let top = ring.integrate(&got.degree_part(2).map_err(err)?).map_err(err)?;
    let pass = got == expected && c1.to_string() == "3*H - 1*E" && top == int(4);
    Ok((pass, format!("c1 = {c1}, integral {top}"), json!({"class": got.to_json(), "integral": top.to_string()})))
}

fn trivial_bundle_over_point(_parallel: bool) -> Check {
    let mut pass = true;
    let mut out = Vec::new();
    for r in 1..=10u32 {
        let u = universe(&["tau"]);
        let tau = GradedPoly::generator(&u, r, "tau").map_err(err)?;
        let data = WeightedBundleData::new(vec![Block::trivial(&u, r, 1, r + 1)]).map_err(err)?;
        let got = fibration_chern(&GradedPoly::one(&u, r), &data, &tau).map_err(err)?;
        let expected = GradedPoly::one_plus_pow(&tau, i64::from(r) + 1).map_err(err)?;
        let ring = RingSpec::new(&u, r, vec![], Some(integral_table(&u, &[(&[("tau", r)], int(1))]))).map_err(err)?;
        let top = ring.integrate(&got.degree_part(r).map_err(err)?).map_err(err)?;
        pass &= got == expected && top == int(i64::from(r) + 1);
        out.push(json!({"r": r, "integral": top.to_string()}));
    }
    Ok((pass, "r = 1..10, top integral r+1".into(), Value::Array(out)))
}

fn weighted_line(_parallel: bool) -> Check {
    let u = universe(&["tau"]);
    let tau = GradedPoly::generator(&u, 2, "tau").map_err(err)?;
    let data = WeightedBundleData::new(vec![Block::trivial(&u, 2, 1, 2), Block::trivial(&u, 2, 2, 1)]).map_err(err)?;
    let got = fibration_chern(&GradedPoly::one(&u, 2), &data, &tau).map_err(err)?;
    let ring = RingSpec::new(&u, 2, vec![], Some(integral_table(&u, &[(&[("tau", 2)], rat(1, 2))]))).map_err(err)?;
    let top = ring.integrate(&got.degree_part(2).map_err(err)?).map_err(err)?;
    let pass = got.to_string() == "1 + 4*tau + 5*tau^2" && top == rat(5, 2);
    Ok((pass, format!("{got}, integral {top}"), json!({"class": got.to_json(), "integral": top.to_string()})))
}

const ITERATED_GRID: [(u32, u32); 4] = [(1, 2), (1, 3), (2, 2), (2, 3)];

fn grid_map<T: Send>(parallel: bool, grid: &[(u32, u32, u32)], f: impl Fn(u32, u32, u32) -> T + Sync) -> Vec<T> {
    if parallel {
        grid.par_iter().map(|&(n, m, d)| f(n, m, d)).collect()
    } else {
        grid.iter().map(|&(n, m, d)| f(n, m, d)).collect()
    }
}

fn iterated_grid() -> Vec<(u32, u32, u32)> {
    ITERATED_GRID.iter().map(|&(n, d)| (n, 1, d)).collect()
}

fn iterated_equals_closed_form(parallel: bool) -> Check {
    let rows = grid_map(parallel, &iterated_grid(), |n, m, d| -> Result<(bool, Value), String> {
        let ctx = ClassContext::for_marked(n, m, d, 3, Admissibility::default())
            .map_err(err)?
            .with_parallel(parallel);
        let mut c = ctx.chern_fibration_step().map_err(err)?;
        for k in (1..=ctx.marks().size()).rev() {
            c = ctx.chern_blowup_step(k, &c).map_err(err)?;
        }
        let closed = ctx.chern_stratum_closed_form(0).map_err(err)?;
        Ok((c == closed, json!({"n": n, "d": d, "class": closed.to_json()})))
    });
    let rows: Vec<(bool, Value)> = rows.into_iter().collect::<Result<_, _>>()?;
    let pass = rows.iter().all(|r| r.0);
    let bad = rows.iter().filter(|r| !r.0).count();
    Ok((pass, format!("{} cases, {bad} mismatched", rows.len()), rows.into_iter().map(|r| r.1).collect()))
}

/// Degree-1 part of the closed form read off factor by factor: the linear
/// part of `∏(1 + x)^e` is `Σ e·x`.
fn log_derivative_degree_one(n: u32, m: u32, d: u32) -> BTreeMap<String, Rational> {
    type Lin = BTreeMap<String, Rational>;
    let marks = MarkSet::new(d, m).expect("valid marks");
    let size = d + m - 1;
    let full = (1u32 << size) - 1;
    let degree_bits = (1u32 << d) - 1;
    let singles: Vec<u32> = (d..size).map(|b| 1 << b).collect();
    let hs: Vec<u32> = (1..full).filter(|h| !singles.contains(h)).collect();
    let name = |h: u32| format!("D{}", marks.subset_name(h));
    let var = |s: &str| Lin::from([(s.to_string(), int(1))]);
    let plus = |a: &Lin, b: &Lin, c: i64| {
        let mut out = a.clone();
        for (k, v) in b {
            *out.entry(k.clone()).or_insert_with(|| int(0)) += v * int(c);
        }
        out
    };
    let mut acc = Lin::new();
    let mut add = |e: i64, x: &Lin| acc = plus(&acc, x, e);
    let np1 = i64::from(n + 1);
    let (hyp, psi) = (var("H"), var("psi"));
    add(np1, &hyp);
    add(i64::from(m) - 2, &psi);
    for i in 1..=i64::from(d) {
        add(np1, &plus(&hyp, &psi, i));
    }
    let subtract_over = |h: u32, strict: bool, weight: &dyn Fn(u32) -> i64| {
        let mut out = Lin::new();
        for &g in &hs {
            if g & h == h && (!strict || g != h) {
                out = plus(&out, &var(&name(g)), -weight(g));
            }
        }
        out
    };
    for &h in &hs {
        let dh = var(&name(h));
        add(1, &dh);
        let e = i64::from((h & !degree_bits).count_ones()) - 1;
        let psi_h = plus(&psi, &subtract_over(h, false, &|_| 1), 1);
        let psi_h0 = plus(&psi, &subtract_over(h, true, &|_| 1), 1);
        add(e, &psi_h);
        add(-e, &psi_h0);
        let outside = i64::from((degree_bits & !h).count_ones());
        let hyp_h = plus(
            &plus(&hyp, &psi, outside),
            &subtract_over(h, true, &|g| i64::from((degree_bits & g & !h).count_ones())),
            1,
        );
        for j in 1..=i64::from((h & degree_bits).count_ones()) {
            add(np1, &plus(&hyp_h, &psi_h, j));
            add(-np1, &plus(&hyp_h, &psi_h0, j));
        }
    }
    acc.retain(|_, v| *v != int(0));
    acc
}

fn degree_one_grid() -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for n in 1..=2 {
        for m in 1..=3 {
            for d in 1..=3 {
                out.push((n, m, d));
            }
        }
    }
    out
}

fn degree_one_structure(parallel: bool) -> Check {
    let rows = grid_map(parallel, &degree_one_grid(), |n, m, d| -> Result<(bool, Value), String> {
        let (ctx, c) = chern_m0m(n, m, d, Some(1), Admissibility::default(), DEFAULT_MAX_DEGREE).map_err(err)?;
        let lin = c.linear_coefficients();
        let (ni, mi, di) = (i64::from(n), i64::from(m), i64::from(d));
        let h_ok = lin.get("H") == Some(&int((ni + 1) * (di + 1)));
        let psi_expected = int((ni + 1) * di * (di + 1) / 2 + mi - 2);
        let psi_ok = lin.get("psi").cloned().unwrap_or_else(|| int(0)) == psi_expected;
        let marks = ctx.marks();
        let divisor_ok = ctx.divisors().iter().all(|&h| {
            let e = i64::from((h & marks.marked_mask()).count_ones()) - 1;
            let j = i64::from((h & marks.degree_mask()).count_ones());
            let expected = int(1 - e - (ni + 1) * j * (j + 1) / 2);
            lin.get(&ctx.divisor_name(h)).cloned().unwrap_or_else(|| int(0)) == expected
        });
        let oracle_ok = log_derivative_degree_one(n, m, d) == lin;
        let named: BTreeMap<&String, String> = lin.iter().map(|(k, v)| (k, v.to_string())).collect();
        Ok((h_ok && psi_ok && divisor_ok && oracle_ok, json!({"n": n, "m": m, "d": d, "c1": named})))
    });
    let rows: Vec<(bool, Value)> = rows.into_iter().collect::<Result<_, _>>()?;
    let bad = rows.iter().filter(|r| !r.0).count();
    Ok((bad == 0, format!("{} cases, {bad} mismatched", rows.len()), rows.into_iter().map(|r| r.1).collect()))
}

fn collapse_property(parallel: bool) -> Check {
    let mut grid: Vec<(u32, u32, u32, u32)> = iterated_grid().into_iter().map(|(n, m, d)| (n, m, d, 3)).collect();
    grid.extend(degree_one_grid().into_iter().map(|(n, m, d)| (n, m, d, 2)));
    let run = |&(n, m, d, cap): &(u32, u32, u32, u32)| -> Result<(bool, Value), String> {
        let ctx = ClassContext::for_marked(n, m, d, cap, Admissibility::default()).map_err(err)?;
        let collapsed = ctx.collapse_divisors(&ctx.chern_stratum_closed_form(0).map_err(err)?);
        let fib = ctx.chern_fibration_step().map_err(err)?;
        Ok((collapsed == fib, json!({"n": n, "m": m, "d": d, "cap": cap, "class": fib.to_json()})))
    };
    let rows: Vec<_> = if parallel { grid.par_iter().map(run).collect() } else { grid.iter().map(run).collect() };
    let rows: Vec<(bool, Value)> = rows.into_iter().collect::<Result<_, _>>()?;
    let bad = rows.iter().filter(|r| !r.0).count();
    Ok((bad == 0, format!("{} cases, {bad} mismatched", rows.len()), rows.into_iter().map(|r| r.1).collect()))
}

fn groupoid_axioms(parallel: bool) -> Check {
    let models = suite().map_err(err)?;
    let bottom = StratumNetwork::new(vec![(vec![], 0)], vec![]).map_err(err)?;
    let run = |m: &stackchern::groupoidlift::models::Model| -> Result<(bool, bool, Value), String> {
        let g = m.data.groupoid();
        let r = subtract_arrows(&m.data, &m.keep).map_err(err)?;
        let report = check_groupoid(g, &r);
        let lifts = iterated_lift(&m.data, &bottom, LiftReading::default()).map_err(err)?;
        let final_ok = check_groupoid(g, &lifts[&vec![]]).passes;
        let one = m.data.part(&m.keep).map_err(err)?;
        let rest: Vec<usize> = (0..m.data.parts().len()).filter(|&p| p != one).collect();
        let s11 = m.data.images_between(&[one], &[one]);
        let s22 = m.data.images_between(&rest, &rest);
        let nested = s22.is_subset(&s11) && s22.iter().any(|&f| !g.is_identity(f));
        let small = g.object_count() <= 12;
        let payload = json!({"model": m.name, "kept": r.arrow_names(g), "final": lifts[&vec![]].arrow_names(g)});
        Ok((report.passes && final_ok && small, nested, payload))
    };
    let rows: Vec<_> = if parallel { models.par_iter().map(run).collect() } else { models.iter().map(run).collect() };
    let rows: Vec<(bool, bool, Value)> = rows.into_iter().collect::<Result<_, _>>()?;
    let nested = rows.iter().filter(|r| r.1).count();
    let bad = rows.iter().filter(|r| !r.0).count();
    let pass = rows.len() >= 20 && nested >= 3 && bad == 0;
    Ok((
        pass,
        format!("{} models, {nested} nested, {bad} failing", rows.len()),
        rows.into_iter().map(|r| r.2).collect(),
    ))
}

fn weight_identities(parallel: bool) -> Check {
    let mut grid = Vec::new();
    for n in 1..=4u32 {
        for deg in 1..=3i64 {
            grid.push((n, deg));
        }
    }
    let run = |&(n, deg): &(u32, i64)| -> Result<(bool, Value), String> {
        let net = StratumNetwork::boolean_lattice(n, int(deg)).map_err(err)?;
        let weights = compute_weights(&net);
        let mut ok = weights.failures.is_empty() && weights.checked > 0;
        let mut factors = BTreeMap::new();
        for s in net.strata() {
            // rank-one strata over the base, each counted with its degree and relative weight
            let w_base = weights.table.get(&s.index).ok_or("missing weight")?.clone();
            let mut d = int(0);
            let mut raw = int(0);
            for (above, _) in net.covers_above(&s.index).map_err(err)? {
                let mult = net.total_degree(above, &s.index).map_err(err)?;
                d += &mult * weights.table.get(above).ok_or("missing weight")? / &w_base;
                raw += mult;
            }
            if raw == int(0) {
                continue;
            }
            let report = verify_section_identity(&net, &weights.table, &s.index, &d).map_err(err)?;
            ok &= report.holds && d == int(1);
            factors.insert(index_name(&s.index), json!({"d": d.to_string(), "unweighted": raw.to_string()}));
        }
        Ok((ok, json!({"n": n, "degree": deg, "weights": weights.table.to_named(), "bases": factors})))
    };
    let rows: Vec<_> = if parallel { grid.par_iter().map(run).collect() } else { grid.iter().map(run).collect() };
    let rows: Vec<(bool, Value)> = rows.into_iter().collect::<Result<_, _>>()?;
    let bad = rows.iter().filter(|r| !r.0).count();
    Ok((
        bad == 0,
        format!("{} networks, {bad} failing, d = 1 at every base", rows.len()),
        rows.into_iter().map(|r| r.1).collect(),
    ))
}

type Criterion = (u32, &'static str, Duration, fn(bool) -> Check);

const CRITERIA: [Criterion; 8] = [
    (1, "blow-up of a point in the plane", Duration::from_secs(1), blowup_point_in_plane),
    (2, "trivial bundle over a point", Duration::from_secs(1), trivial_bundle_over_point),
    (3, "weighted line", Duration::from_secs(1), weighted_line),
    (4, "iterated blow-ups equal closed form", Duration::from_secs(30), iterated_equals_closed_form),
    (5, "degree-1 structure", Duration::from_secs(10), degree_one_structure),
    (6, "collapse of boundary divisors", Duration::from_secs(10), collapse_property),
    (7, "groupoid axioms", Duration::from_secs(5), groupoid_axioms),
    (8, "weight identities", Duration::from_secs(5), weight_identities),
];

fn transcript(parallel: bool) -> String {
    let payloads: Vec<Value> = CRITERIA
        .iter()
        .map(|(id, _, _, f)| match f(parallel) {
            Ok((pass, _, v)) => json!({"criterion": id, "pass": pass, "output": v}),
            Err(e) => json!({"criterion": id, "error": e}),
        })
        .collect();
    serde_json::to_string(&payloads).expect("serializable")
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    let mut line = |id: u32, name: &str, pass: bool, detail: &str, elapsed: Duration, limit: Duration| {
        let timed = elapsed < limit;
        let verdict = if pass && timed { "PASS" } else { "FAIL" };
        println!(
            "[{verdict}] {id}. {name}: {detail} ({:.3} s, limit {} s)",
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if verdict == "FAIL" {
            failed.push(id);
        }
    };
    for (id, name, limit, f) in CRITERIA {
        let start = Instant::now();
        let result = f(false);
        let elapsed = start.elapsed();
        match result {
            Ok((pass, detail, _)) => line(id, name, pass, &detail, elapsed, limit),
            Err(e) => line(id, name, false, &format!("error: {e}"), elapsed, limit),
        }
    }
    let start = Instant::now();
    let runs: Vec<String> = [false, false, false, true, true, true].iter().map(|&p| transcript(p)).collect();
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    line(
        9,
        "determinism",
        identical,
        &format!("6 runs (3 serial, 3 parallel), {} bytes each", runs[0].len()),
        start.elapsed(),
        Duration::from_secs(10),
    );
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
