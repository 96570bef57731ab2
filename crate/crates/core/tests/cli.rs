//! End-to-end tests of the `nilsol` binary: exit codes, determinism, error
//! diagnostics, output files and catalog round-trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nilsol"))
}

fn catalog_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../catalog/{name}"))
}

fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/fixtures/{name}"))
}

fn run(args: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    cmd.output().expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

const CATALOG: [&str; 8] = [
    "abelian3-riemannian.json",
    "abelian3-killing.json",
    "heisenberg3-riemannian.json",
    "heisenberg3-killing.json",
    "heisenberg5-riemannian.json",
    "heisenberg5-killing.json",
    "filiform4-riemannian.json",
    "filiform4-killing.json",
];

#[test]
fn check_succeeds_on_every_catalog_file() {
    for name in CATALOG {
        let path = catalog_path(name);
        let out = run(&["check", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr_str(&out));
        let text = stdout_str(&out);
        let json: serde_json::Value = serde_json::from_str(&text).expect("valid json");
        assert_eq!(json["meta"]["schema_version"], 1, "{name}");
        assert_eq!(json["check"]["jacobi"]["pass"], true, "{name}");
        assert_eq!(json["check"]["admissible"], true, "{name}");
        assert_eq!(json["check"]["killing"]["pass"], true, "{name}");
    }
}

#[test]
fn catalog_files_round_trip_through_the_model_format() {
    for name in CATALOG {
        let text = std::fs::read_to_string(catalog_path(name)).unwrap();
        let parsed = nilsol::model::parse_model(&text).unwrap();
        let serialized = parsed.to_json_pretty();
        let reparsed = nilsol::model::parse_model(&serialized).unwrap();
        assert_eq!(parsed, reparsed, "{name} round-trip changed the model");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let path = catalog_path("heisenberg3-killing.json");
    let p = path.to_str().unwrap();
    for args in [
        vec!["check", p],
        vec!["curvature", p, "--samples", "8", "--seed", "5"],
        vec!["soliton", p],
        vec!["flow", p, "--t", "0.25"],
        vec!["report", p, "--samples", "8", "--t", "0.25"],
    ] {
        let first = run(&args);
        let second = run(&args);
        assert_eq!(first.status.code(), Some(0), "{args:?}: {}", stderr_str(&first));
        assert_eq!(first.stdout, second.stdout, "{args:?} reruns differ");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let path = catalog_path("heisenberg5-riemannian.json");
    let args = ["curvature", path.to_str().unwrap(), "--samples", "16"];
    let single = run(&args);
    let mut cmd = bin();
    cmd.args(args).env("NILSOL_THREADS", "4");
    let multi = cmd.output().unwrap();
    assert_eq!(single.status.code(), Some(0));
    assert_eq!(multi.status.code(), Some(0));
    assert_eq!(single.stdout, multi.stdout, "thread count leaked into the report");
}

#[test]
fn jacobi_violation_is_diagnosed_with_indices() {
    let path = fixture_path("bad_jacobi.json");
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_str(&out);
    assert!(
        err.contains("jacobi violation at (1,2,3)"),
        "missing indexed diagnostic: {err}"
    );
}

#[test]
fn syntax_errors_are_line_anchored() {
    let path = fixture_path("bad_syntax.json");
    let out = run(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_str(&out);
    assert!(err.contains("parse error at line"), "not line-anchored: {err}");
    assert!(err.contains("line 5"), "wrong line: {err}");
}

#[test]
fn missing_file_is_an_input_error() {
    let out = run(&["check", "/nonexistent/model.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).starts_with("error: "));
}

#[test]
fn numerical_failures_exit_with_three() {
    let path = catalog_path("heisenberg3-riemannian.json");
    let out = run(&["flow", path.to_str().unwrap(), "--t=-1.0"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr_str(&out));
    assert!(stderr_str(&out).contains("numerical failure"));
}

#[test]
fn soliton_on_non_killing_drift_requires_force() {
    let path = fixture_path("non_killing.json");
    let p = path.to_str().unwrap();
    let refused = run(&["soliton", p]);
    assert_eq!(refused.status.code(), Some(2));
    assert!(stderr_str(&refused).contains("not Killing"));
    let forced = run(&["soliton", p, "--force"]);
    assert_eq!(forced.status.code(), Some(0), "{}", stderr_str(&forced));
    let json: serde_json::Value = serde_json::from_str(&stdout_str(&forced)).unwrap();
    assert_eq!(json["soliton"]["killing"]["forced"], true);
    assert_eq!(json["soliton"]["killing"]["pass"], false);
}

#[test]
fn output_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let path = catalog_path("abelian3-killing.json");
    let p = path.to_str().unwrap();
    let to_stdout = run(&["check", p]);
    let to_file = run(&["check", p, "--output", out_path.to_str().unwrap()]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty(), "output flag must silence stdout");
    let written = std::fs::read(&out_path).unwrap();
    assert_eq!(written, to_stdout.stdout);
}

#[test]
fn flow_trajectory_flag_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("trajectory.csv");
    let path = catalog_path("heisenberg3-riemannian.json");
    let out = run(&[
        "flow",
        path.to_str().unwrap(),
        "--t",
        "0.1",
        "--trajectory",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,a_1_1,a_1_2,a_1_3,a_2_2,a_2_3,a_3_3"));
    let first = lines.next().expect("at least one row");
    assert!(first.starts_with("0,1,"), "first row {first}");
}

#[test]
fn curvature_accepts_a_base_point_and_validates_its_dimension() {
    let path = catalog_path("heisenberg3-killing.json");
    let p = path.to_str().unwrap();
    let good = run(&["curvature", p, "--samples", "4", "--at", "-0.1,0.2,0.3"]);
    assert_eq!(good.status.code(), Some(0), "{}", stderr_str(&good));
    let json: serde_json::Value = serde_json::from_str(&stdout_str(&good)).unwrap();
    assert_eq!(json["curvature"]["at"], serde_json::json!([-0.1, 0.2, 0.3]));

    let bad = run(&["curvature", p, "--at", "0.1,0.2"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr_str(&bad).contains("dimension mismatch"));
}

#[test]
fn report_covers_all_sections_and_respects_flags() {
    let path = catalog_path("filiform4-killing.json");
    let out = run(&[
        "report",
        path.to_str().unwrap(),
        "--samples",
        "8",
        "--t",
        "0.2",
        "--normalized",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(json["check"]["killing"]["pass"], true);
    assert!(json["curvature"]["samples"].as_array().unwrap().len() == 8);
    assert!(json["soliton"].is_object(), "killing drift must produce a soliton section");
    assert_eq!(json["flow"]["kind"], "normalized");
    assert_eq!(json["flow"]["t_end"], 0.2);
}

#[test]
fn timing_flag_is_the_only_source_of_nondeterminism() {
    let path = catalog_path("abelian3-riemannian.json");
    let p = path.to_str().unwrap();
    let timed = run(&["check", p, "--timing"]);
    assert_eq!(timed.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout_str(&timed)).unwrap();
    assert!(json["meta"]["timing_ms"].is_number());
    let untimed = run(&["check", p]);
    let json: serde_json::Value = serde_json::from_str(&stdout_str(&untimed)).unwrap();
    assert!(json["meta"].get("timing_ms").is_none());
}
