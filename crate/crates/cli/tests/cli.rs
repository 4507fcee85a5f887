use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_expgroup"))
}

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn run(args: &[&str]) -> Output {
    exe().args(args).output().unwrap()
}

fn spec(name: &str) -> String {
    specs().join(name).display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn choose_k_prints_the_least_k() {
    let o = run(&["choose-k", "--c", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["k"], 7);
    assert!(run(&["choose-k", "--c", "1"]).status.code() == Some(2));
}

#[test]
fn report_goes_to_out_with_a_stable_key_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let d4 = spec("d4.json");
    let o = run(&[
        "gen-additive",
        "--spec",
        &d4,
        "--trials",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("gen-additive: 0 of 50"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.trim_start().starts_with("{\n  \"command\": \"gen-additive\""));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["trials"], 50);
    assert_eq!(v["n"], 8);
    assert_eq!(v["trialOutcomes"].as_str().unwrap().len(), 50);
}

#[test]
fn gen_ideal_accepts_labels_and_needs_some_t() {
    let d4 = spec("d4.json");
    let o = run(&["gen-ideal", "--spec", &d4, "--t", "f", "--trials", "20", "--reduce"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["reduce"], true);

    let o = run(&["gen-ideal", "--spec", &d4, "--t", "nope", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope"), "{}", stderr(&o));

    let o = run(&["gen-ideal", "--spec", &spec("z8.json"), "--trials", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("idealGenerators"));
}

#[test]
fn malformed_spec_names_the_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"name": "x", "family": {"name": "cyclic", "n": 4}, "colour": 1}"#,
    )
    .unwrap();
    let o = run(&["gen-additive", "--spec", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));

    std::fs::write(
        &bad,
        r#"{"name": "x", "family": {"name": "cyclic", "n": 4}, "generators": [9]}"#,
    )
    .unwrap();
    let o = run(&["gen-additive", "--spec", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("generators"), "{}", stderr(&o));

    let o = run(&["gen-additive", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn basis_without_the_nilpotent_flag_is_refused() {
    let basis = specs().join("bases/unchecked.json");
    let o = run(&[
        "decide-variety",
        "--spec",
        &spec("z6_ring.json"),
        "--basis",
        basis.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn n_below_the_encoding_length_is_a_usage_error() {
    let o = run(&["gen-additive", "--spec", &spec("d4.json"), "--n", "3", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("encoding length"));
}

#[test]
fn multiset_mode_and_salt_override_run() {
    let o = run(&[
        "gen-additive",
        "--spec",
        &spec("z6_ring.json"),
        "--keep-duplicates",
        "--salt-bits",
        "0",
        "--trials",
        "30",
        "--seed",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["saltBits"], 0);
    assert_eq!(v["n"], 3);
}

#[test]
fn decide_variety_reports_ground_truth() {
    let basis = specs().join("bases/abelian.json");
    let o = run(&[
        "decide-variety",
        "--spec",
        &spec("s4.json"),
        "--basis",
        basis.to_str().unwrap(),
        "--trials",
        "40",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["groundTruth"], false);
    assert_eq!(v["memberAnswers"], 0);
}
