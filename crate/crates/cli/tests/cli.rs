use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn nslimit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nslimit")).args(args).output().unwrap()
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str, text: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_reports_classes() {
    let out = nslimit(&["validate", &model("banana.model")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["model"]["m"], 3);
    assert!(v["classes"].is_object());
}

#[test]
fn invalid_input_exits_one_with_a_located_diagnostic() {
    let bad = scratch("loop.model", "model {\n  m = 2\n  vertex A { genus = 1 }\n  edge A -- A\n}\n");
    let out = nslimit(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["status"], "error");
    assert_eq!(v["diagnostics"][0]["span"]["line"], 4);
    assert!(!out.stderr.is_empty());

    assert_eq!(nslimit(&["dims", "/does/not/exist.model"]).status.code(), Some(1));
    assert_eq!(nslimit(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(nslimit(&["measure", &model("dumbbell.model"), "--kind", "xx"]).status.code(), Some(1));
    assert_eq!(nslimit(&["--help"]).status.code(), Some(0));
}

#[test]
fn failed_preconditions_exit_one() {
    // the fixed-B limit needs genus at least 2
    let out = nslimit(&["limit", &model("dumbbell.model"), "--mode", "fixed-QB"]);
    assert_eq!(out.status.code(), Some(0));
    let elliptic = scratch("elliptic.model", "model { m = 2; vertex E { genus = 1 }; mark P on E coeff 1 }");
    let out = nslimit(&["limit", &elliptic, "--mode", "fixed-B"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["kind"], "precondition");
}

#[test]
fn quadrature_failure_exits_three() {
    // the family vanishes at w = −1/2
    let out = nslimit(&["verify", "--experiment", "norm", "--logt", "50", "--family", "1@0,0 + 2@0,1"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["kind"], "non-convergence");
    assert_eq!(v["diagnostics"][0]["routine"], "integrate_halfannulus");
}

#[test]
fn reduce_replays_the_leaf_chain() {
    let out = nslimit(&["reduce", &model("leaf_chain.model")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let events = v["log"]["events"].as_array().unwrap();
    assert_eq!(events.len(), 2);
    assert!(events.iter().all(|e| e["event"] == "collapse-leaf"));
    assert_eq!(v["model"]["vertices"].as_array().unwrap().len(), 1);
    assert!(v["text"].as_str().unwrap().contains("vertex E3 { genus = 2 }"));
}

#[test]
fn measures_and_dimensions_agree() {
    let dims = json(&nslimit(&["dims", &model("banana.model")]));
    assert_eq!(dims["total"], 12);
    let pb = json(&nslimit(&["measure", &model("banana.model"), "--kind", "pb", "--push", "hyb"]));
    assert_eq!(pb["total"]["num"], 12);
    assert_eq!(pb["total"]["den"], 1);
    let fiber = json(&nslimit(&["measure", &model("banana.model"), "--kind", "ns", "--push", "fiber"]));
    assert_eq!(fiber["kind"], "ns");
    let limit = json(&nslimit(&["limit", &model("banana.model"), "--mode", "fixed-QB"]));
    // 2g − 2 + deg B/m with g = 1 + 1 + 4 − 4 + 1 = 3, deg B = 2, m = 3
    assert_eq!((limit["total"]["num"].clone(), limit["total"]["den"].clone()), (Value::from(14), Value::from(3)));
}

#[test]
fn dot_output_is_written() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("banana.dot");
    let _ = fs::remove_file(&path);
    let out = nslimit(&["stable-graph", &model("banana.model"), "--dot", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let dot = fs::read_to_string(&path).unwrap();
    assert!(dot.starts_with("graph") && dot.contains("--"), "{dot}");
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--experiment", "norm", "--logt", "10,100,1000", "--seed", "3"];
    let a = nslimit(&args);
    let b = nslimit(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["log_t_inv"].as_array().unwrap().len(), 3);
    let columns = nslimit(&["verify", "--experiment", "norm", "--logt", "10,100", "--format", "columns"]);
    let text = String::from_utf8(columns.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn decreasing_grid_is_rejected() {
    let out = nslimit(&["verify", "--experiment", "norm", "--logt", "100,10"]);
    assert_eq!(out.status.code(), Some(1));
}
