//! End-to-end runs of the `bcrlab` binary: golden outputs, exit codes and
//! error reporting.

use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcrlab")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Runs a failing command and returns (exit code, error kind).
fn err_json(args: &[&str]) -> (i32, String) {
    let out = run(args);
    assert!(out.stdout.is_empty(), "no result on failure");
    let e: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert!(e["message"].as_str().is_some_and(|m| !m.is_empty()));
    (out.status.code().unwrap(), e["error"].as_str().unwrap().to_string())
}

#[test]
fn quotient_dimension_golden() {
    for k in [2, 3] {
        let v = ok_json(&["algebra", "quotient-dim", "--k", &k.to_string()]);
        assert_eq!(v, serde_json::json!({ "k": k, "dim": 1 }));
    }
}

#[test]
fn enumeration_counts() {
    for (k, n) in [(2, 5), (3, 13)] {
        let v = ok_json(&["diagrams", "enumerate", "--k", &k.to_string()]);
        assert_eq!(v["count"], n);
        assert_eq!(v["classes"].as_array().unwrap().len(), n);
    }
}

#[test]
fn enumerated_diagrams_feed_back_into_weight() {
    let v = ok_json(&["diagrams", "enumerate", "--k", "2"]);
    let dir = tempfile::tempdir().unwrap();
    let mut weights = Vec::new();
    for (i, c) in v["classes"].as_array().unwrap().iter().enumerate() {
        let path = dir.path().join(format!("d{i}.json"));
        std::fs::write(&path, c["diagram"].to_string()).unwrap();
        let w = ok_json(&["diagrams", "weight", "--diagram", path.to_str().unwrap()]);
        assert_eq!(w["k"], 2);
        weights.push(w["weight"].as_str().unwrap().to_string());
    }
    // every degree-2 class has weight ±1
    assert!(weights.iter().all(|w| w == "1" || w == "-1"), "{weights:?}");
}

#[test]
fn relations_filter_by_kind() {
    let all = ok_json(&["algebra", "relations", "--k", "2"]);
    let stu = ok_json(&["algebra", "relations", "--k", "2", "--kind", "STU"]);
    assert!(stu["count"].as_u64().unwrap() >= 1);
    assert!(all["count"].as_u64().unwrap() >= stu["count"].as_u64().unwrap());
    assert!(stu["relations"].as_array().unwrap().iter().all(|r| r["kind"] == "STU"));
    assert_eq!(err_json(&["algebra", "relations", "--k", "2", "--kind", "XX"]), (2, "validation".into()));
}

#[test]
fn alexander_golden() {
    let w3 = ok_json(&["alexander", "--wheel", "3"]);
    assert_eq!(w3["delta"]["text"], "3t - 3t^2 + t^3");
    let file = ok_json(&["alexander", "--presentation", data("wheel2.json").to_str().unwrap()]);
    let builtin = ok_json(&["alexander", "--wheel", "2"]);
    assert_eq!(file, builtin);
    assert_eq!(file["delta"]["text"], "t^-1 - 1 + t");
    let del = ok_json(&["alexander", "--wheel", "2", "--delete-column", "1"]);
    assert_eq!(del["delta"], file["delta"]);
}

#[test]
fn alpha_golden() {
    let v = ok_json(&["alpha", "--wheel", "2", "--order", "4"]);
    assert_eq!(v["alpha"], serde_json::json!({ "2": "1", "3": "0", "4": "-5/12" }));
}

#[test]
fn scheme_and_chordmap() {
    let marked = data("wheel2_marked.json");
    let m = marked.to_str().unwrap();
    let a = ok_json(&["scheme", "eval", "--marked", m, "--invariant", "alpha:2"]);
    assert_eq!((a["value"].as_str(), a["terms"].as_u64()), (Some("1"), Some(4)));
    let c = ok_json(&["chordmap", "--marked", m]);
    assert_eq!((c["k"].as_u64(), c["pairing_value"].as_str()), (Some(2), Some("1")));
    let one = data("wheel2_one_mark.json");
    assert_eq!(err_json(&["chordmap", "--marked", one.to_str().unwrap()]).0, 2);
    assert_eq!(err_json(&["scheme", "eval", "--marked", m, "--invariant", "alpha:x"]).0, 2);
}

#[test]
fn exit_codes() {
    assert_eq!(err_json(&["alexander", "--wheel", "99"]), (1, "resource".into()));
    assert_eq!(err_json(&["diagrams", "enumerate", "--k", "2", "--bogus"]), (2, "usage".into()));
    assert_eq!(err_json(&["nonsense"]), (2, "usage".into()));
    assert_eq!(err_json(&["alexander"]).0, 2);
    assert_eq!(err_json(&["mc", "phi-diff", "--eps", "0.5"]), (2, "validation".into()));
    assert_eq!(err_json(&["mc", "linking", "--samples", "0"]).0, 2);
    assert_eq!(err_json(&["mc", "linking", "--samples", "1.5"]).0, 2);
    assert_eq!(err_json(&["diagrams", "weight", "--diagram", "/does/not/exist.json"]).0, 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(err_json(&["alexander", "--presentation", bad.to_str().unwrap()]).0, 2);
    assert!(run(&["--help"]).status.success());
}

#[test]
fn monte_carlo_is_reproducible() {
    let args = ["mc", "linking", "--samples", "2e4", "--seed", "7"];
    let a = run(&[&["--threads", "1"][..], &args].concat());
    let b = run(&[&["--threads", "3"][..], &args].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "result independent of thread count");
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["config"]["samples"], 20000);
    let e = &v["estimate"];
    assert!((e["mean"].as_f64().unwrap() - 1.0).abs() < 5.0 * e["stderr"].as_f64().unwrap());
    let r: Value = serde_json::from_slice(&run(&[&args[..], &["--reverse"]].concat()).stdout).unwrap();
    assert_eq!(r["estimate"]["mean"].as_f64().unwrap(), -e["mean"].as_f64().unwrap());
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("res.json");
    let out = run(&["mc", "phi-diff", "--samples", "1e4", "--batches", "8", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let stdout: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(file, stdout);
    let swapped = ok_json(&["mc", "phi-diff", "--samples", "1e4", "--batches", "8", "--swapped"]);
    assert_eq!(swapped["estimate"]["mean"].as_f64().unwrap(), -file["estimate"]["mean"].as_f64().unwrap());
}

#[test]
fn z2_on_the_plane_is_exactly_zero() {
    let v = ok_json(&["mc", "z2", "--samples", "2000", "--batches", "4"]);
    assert_eq!(v["estimate"]["mean"].as_f64(), Some(0.0));
    assert_eq!(v["terms"].as_array().unwrap().len(), 3);
}
