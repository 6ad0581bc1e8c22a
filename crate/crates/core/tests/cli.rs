use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::Value;
use sha2::{Digest, Sha256};
use ssc_core::cli::run;

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn ssc(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ssc").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = ssc(args);
    assert!(err.is_empty(), "{err}");
    (code, serde_json::from_str(&out).unwrap())
}

fn temp(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn controllable_five_state() {
    let (code, v) = json(&["controllable", &data("five_state.cpm")]);
    assert_eq!(code, 0);
    let verdict = &v["result"]["verdict"];
    assert_eq!(verdict["status"], "sufficient_controllable");
    assert_eq!(verdict["original"]["colorable"], true);
    assert_eq!(verdict["barred"]["colorable"], true);
    assert!(!verdict["barred"]["trace"]["steps"]
        .as_array()
        .unwrap()
        .is_empty());
    assert_eq!(verdict["sampling"], Value::Null);
}

#[test]
fn report_envelope() {
    let path = data("square3.cpm");
    let (_, v) = json(&["nonsingular", &path, "--seed", "42"]);
    let digest = hex::encode(Sha256::digest(std::fs::read(&path).unwrap()));
    assert_eq!(v["input_sha256"], digest);
    assert_eq!(v["seed"], 42);
    assert_eq!(v["tool"], "ssc");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["command"], "nonsingular");
}

#[test]
fn nonsingular_square3() {
    let (code, v) = json(&["nonsingular", &data("square3.cpm")]);
    assert_eq!(code, 0);
    let w = &v["result"]["certificate"]["witness"];
    assert_eq!(w["kind"], "unique_solid_class");
    assert_eq!(w["spectrum"], serde_json::json!(["c1", "c1", "c2"]));
    assert_eq!(v["result"]["certificate"]["matching_count"], 3);
}

#[test]
fn singular_pattern_is_refuted() {
    let f = temp("dims 2 2\nc1 g1\nc1 c2\n");
    let (code, v) = json(&["nonsingular", f.path().to_str().unwrap()]);
    assert_eq!(code, 3);
    assert_eq!(v["result"]["singular_search"]["kind"], "witness");
}

#[test]
fn det_prints_polynomial() {
    let (code, v) = json(&["det", &data("square3.cpm")]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["text"], "-c1^2*c2");
    assert_eq!(v["result"]["single_solid_monomial"], true);
}

#[test]
fn sufficiency_gap_exit_codes() {
    assert_eq!(json(&["colorable", &data("colorless_gap.cpm")]).0, 2);
    let (code, v) = json(&["fullrank", &data("colorless_gap.cpm"), "--trials", "300"]);
    assert_eq!(code, 2);
    assert_eq!(v["result"]["sampling"]["counterexample"], Value::Null);
    let (code, v) = json(&["controllable", &data("two_state.cpm"), "--trials", "200"]);
    assert_eq!(code, 2);
    assert_eq!(v["result"]["verdict"]["status"], "inconclusive");
    assert_eq!(
        v["result"]["verdict"]["failed_sides"],
        serde_json::json!(["barred"])
    );
}

#[test]
fn counterexample_exit_codes() {
    let f = temp("dims 1 2 1\n0 g1\n");
    let (code, v) = json(&["controllable", f.path().to_str().unwrap()]);
    assert_eq!(code, 3);
    let cx = &v["result"]["verdict"]["sampling"]["counterexample"];
    assert_eq!(cx["b"], serde_json::json!([["0"]]));

    let f = temp("dims 2 3\ng1 c1 c2\nc1 c3 c2\n");
    assert_eq!(json(&["fullrank", f.path().to_str().unwrap()]).0, 3);
}

#[test]
fn bar_outputs_document() {
    let (code, out, _) = ssc(&["bar", &data("two_state.cpm"), "--human"]);
    assert_eq!(code, 0);
    assert_eq!(out, "dims 2 3 2\ng1 c1 c2\nc1 c3 c2\n");
    let (_, v) = json(&["bar", &data("five_state.cpm")]);
    assert_eq!(
        v["result"]["renumbering"][0],
        serde_json::json!({"from": "g3", "to": "g2"})
    );
}

#[test]
fn state_dim_flag_overrides_header() {
    let f = temp("dims 2 3\nc1 c1 c2\nc1 0 c2\n");
    let (code, v) = json(&["controllable", f.path().to_str().unwrap(), "--n", "2"]);
    assert_eq!(code, 2);
    assert_eq!(v["result"]["verdict"]["status"], "inconclusive");
    assert_eq!(
        ssc(&["controllable", &data("two_state.cpm"), "--n", "1"]).0,
        1
    );
    let (code, _, err) = ssc(&["controllable", &data("square3.cpm")]);
    assert_eq!(code, 1);
    assert!(err.contains("state dimension"));
}

#[test]
fn validate_lists_every_problem() {
    let f = temp("dims 2 3\nc1 c3 0\ng2 0\n");
    let (code, v) = json(&["validate", f.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    let diags = v["result"]["diagnostics"].as_array().unwrap();
    assert!(diags.len() >= 2, "{diags:?}");
    assert_eq!(json(&["validate", &data("five_state.cpm")]).0, 0);
}

#[test]
fn input_errors_exit_one() {
    let f = temp("dims 1 2\nc0 x\n");
    let (code, out, err) = ssc(&["colorable", f.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.starts_with("error:"));
    assert_eq!(ssc(&["frobnicate", "x"]).0, 1);
    assert_eq!(ssc(&["colorable", "/nonexistent/file.cpm"]).0, 1);
}

#[test]
fn budget_exhaustion_exits_one() {
    let (code, _, err) = ssc(&["nonsingular", &data("square3.cpm"), "--budget", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("budget"), "{err}");
}

#[test]
fn sample_is_deterministic() {
    let args = [
        "sample",
        &data("five_state.cpm") as &str,
        "--seed",
        "9",
        "--trials",
        "4",
    ];
    let (code, a, _) = ssc(&args);
    assert_eq!(code, 0);
    assert_eq!(ssc(&args).1, a);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["result"]["samples"].as_array().unwrap().len(), 4);
    assert_ne!(
        ssc(&[
            "sample",
            &data("five_state.cpm"),
            "--seed",
            "10",
            "--trials",
            "4"
        ])
        .1,
        a
    );
}

#[test]
fn binary_reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ssc"))
        .args(["colorable", "-", "--human"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(std::fs::read(data("colorless_gap.cpm")).unwrap().as_slice())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "not colorable\n");
}

#[test]
fn binary_help_exits_zero() {
    let out = Command::new(env!("CARGO_BIN_EXE_ssc"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("controllable"));
}
