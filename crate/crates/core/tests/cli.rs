//! Runs the `stackchern` binary on the files in `tests/data`.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use stackchern::groupoidlift::models::labelled_setoid;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_stackchern"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn blown_up_plane_summary() {
    let v = json(&["blowup", &data("blowup_plane.json")]);
    assert_eq!(v["summary"]["c1"], "3*H - 1*E");
    assert_eq!(v["summary"]["integral"], "4");
    let (_, text, _) = run(&["blowup", &data("blowup_plane.json"), "--format", "text"]);
    assert!(text.contains("c1 = 3*H - 1*E"));
}

#[test]
fn empty_bundle_returns_the_input_class() {
    let v = json(&["blowup", &data("empty_bundle.json")]);
    assert_eq!(v["text"], "1 + 3*H");
}

#[test]
fn weighted_line_integral() {
    let v = json(&["fibration", &data("weighted_line.json")]);
    assert_eq!(v["text"], "1 + 4*tau + 5*tau^2");
    assert_eq!(v["summary"]["integral"], "5/2");
}

#[test]
fn stablemaps_truncation_is_consistent() {
    let base = ["stablemaps", "--n", "1", "--m", "2", "--d", "2"];
    let at = |cap: &str| {
        let mut args = base.to_vec();
        args.extend(["--cap", cap]);
        json(&args)
    };
    let one = at("1");
    let two = at("2");
    assert_eq!(one["c1"], two["c1"]);
    let low: Vec<&Value> = two["class"]["terms"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|t| t["mono"].as_object().unwrap().values().map(|e| e.as_u64().unwrap()).sum::<u64>() <= 1)
        .collect();
    let ones: Vec<&Value> = one["class"]["terms"].as_array().unwrap().iter().collect();
    assert_eq!(low, ones);
}

#[test]
fn stablemaps_iterated_agrees() {
    let v = json(&["stablemaps", "--n", "2", "--m", "1", "--d", "3", "--cap", "2", "--iterated", "--parallel"]);
    assert_eq!(v["iterated_agrees"], true);
    assert_eq!(v["c1"]["H"], "12");
}

#[test]
fn conflicting_chains_are_named() {
    let (code, _, err) = run(&["network", &data("conflicting_chains.json")]);
    assert_eq!(code, 2);
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    let reason = v["reason"].as_str().unwrap();
    assert!(reason.contains("{1,2} > {1} > {}"), "{reason}");
    assert!(reason.contains("{1,2} > {2} > {}"), "{reason}");
}

#[test]
fn boolean_network_report() {
    let v = json(&["network", &data("boolean2.json")]);
    assert_eq!(v["weights"]["{1,2}"], "1/2");
    assert_eq!(v["weights"]["{1}"], "1/2");
    assert_eq!(v["degree_ratio"]["failures"].as_array().unwrap().len(), 0);
    assert_eq!(v["homogeneity"]["homogeneous"], true);
    assert!(v["section_identity"].as_array().unwrap().iter().all(|s| s["holds"] == true));
}

#[test]
fn groupoid_model_with_poset() {
    let data = labelled_setoid(
        &[3, 1],
        &[
            (0, vec!["1/a", "1/a", "1/a"]),
            (0, vec!["1/b", "2/a", "2/a"]),
            (1, vec!["2/a"]),
        ],
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    std::fs::write(&model, serde_json::to_string(&data.to_json()).unwrap()).unwrap();
    let model = model.display().to_string();
    let v = json(&["groupoid", &model, "--keep", "1/a", "--network", &self::data("boolean2.json")]);
    assert_eq!(v["subtraction"]["result"]["check"]["passes"], true);
    assert_eq!(v["subtraction"]["unchanged_outside_image"], true);
    assert_eq!(v["lifts"].as_array().unwrap().len(), 4);
    assert!(v["fiber_counts"].as_array().unwrap().iter().all(|c| c["counts"]["matches"] == true));
    let literal = json(&["groupoid", &model, "--network", &self::data("boolean2.json"), "--reading", "literal"]);
    assert_eq!(literal["lifts"]["failed_at"], "{1}");
}

#[test]
fn output_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for i in 0..3 {
        let p = dir.path().join(format!("out{i}.json"));
        let (code, _, _) = run(&[
            "stablemaps", "--n", "1", "--m", "2", "--d", "3", "--cap", "2", "--parallel", "--out",
            &p.display().to_string(),
        ]);
        assert_eq!(code, 0);
        seen.push(std::fs::read(&p).unwrap());
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]));
}
