//! Exit-code and surface behavior of the `pdflow` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pdflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdflow"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn pdflow")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pdflow(tmp.path(), &["dist", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Usage") || stderr(&out).contains("error"));

    let out = pdflow(tmp.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn self_distance_prints_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = pdflow(dir, &["synth", "multiwell", "--seed", "3", "--out", "w.field"]);
    assert!(out.status.success());
    let out = pdflow(dir, &["field-pd", "w.field", "--out", "pd"]);
    assert!(out.status.success());
    let out = pdflow(
        dir,
        &["dist", "pd/w.pdiag", "pd/w.pdiag", "--metric", "bottleneck"],
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.trim(), "0.00000000000");
    assert_eq!(text.trim().parse::<f64>().unwrap(), 0.0);
}

#[test]
fn computation_errors_exit_1_with_one_line() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // diagrams with mismatched essential counts: a torus field vs an
    // edited diagram with one essential removed
    pdflow(dir, &["synth", "constant", "--seed", "0", "--out", "c.field"]);
    assert!(pdflow(dir, &["field-pd", "c.field", "--out", "pd"]).status.success());
    let full = fs::read_to_string(dir.join("pd/c.pdiag")).unwrap();
    let trimmed: Vec<&str> = full.lines().take(full.lines().count() - 1).collect();
    fs::write(dir.join("pd/broken.pdiag"), trimmed.join("\n") + "\n").unwrap();

    let out = pdflow(
        dir,
        &["dist", "pd/c.pdiag", "pd/broken.pdiag", "--metric", "w1"],
    );
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert_eq!(err.trim().lines().count(), 1, "diagnostic must be one line");
    assert!(err.contains("essential"), "unexpected diagnostic: {err}");
}

#[test]
fn malformed_field_reports_location() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(
        dir.join("bad.field"),
        "FIELD2D v1\nnx 3 ny 3 boundary bounded mask 0\n1 2 3\n4 5 6\n7 8\n",
    )
    .unwrap();
    let out = pdflow(dir, &["field-pd", "bad.field", "--out", "pd"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("dimension mismatch"));
}

#[test]
fn quantize_rejects_constant_field() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pdflow(dir, &["synth", "constant", "--seed", "0", "--out", "c.field"]);
    let out = pdflow(dir, &["quantize", "c.field", "--out", "q.field"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.join("q.field").exists(), "failed run left output behind");
}

#[test]
fn failed_runs_leave_no_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("garbage.csv"), "not,a\nmatrix\n").unwrap();
    let out = pdflow(
        dir,
        &["cluster", "garbage.csv", "--theta", "0.5", "--out", "labels.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.join("labels.csv").exists());
    let leftovers: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with(".pdflow-tmp"))
        .collect();
    assert!(leftovers.is_empty(), "temp files left behind");
}

#[test]
fn matching_file_covers_every_point() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pdflow(
        dir,
        &["synth", "multiwell", "--depths", "-3,-2,-1", "--saddles", "-0.5,0", "--seed", "1", "--out", "a.field"],
    );
    pdflow(dir, &["synth", "multiwell", "--seed", "2", "--out", "b.field"]);
    assert!(pdflow(dir, &["field-pd", "a.field", "--out", "pd"]).status.success());
    assert!(pdflow(dir, &["field-pd", "b.field", "--out", "pd2"]).status.success());
    let out = pdflow(
        dir,
        &[
            "dist", "pd/a.pdiag", "pd2/b.pdiag",
            "--metric", "w2",
            "--matching", "m.txt",
        ],
    );
    assert!(out.status.success());
    let matching = fs::read_to_string(dir.join("m.txt")).unwrap();
    // a: wells at -3,-2,-1 -> 3 points in dim 0; b: 2 points in dim 0
    let mut a_mentions = 0;
    let mut b_mentions = 0;
    for line in matching.lines() {
        let tok: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(tok.len(), 3, "bad matching line `{line}`");
        if tok[1] != "diag" {
            a_mentions += 1;
        }
        if tok[2] != "diag" {
            b_mentions += 1;
        }
    }
    assert_eq!(a_mentions, 3);
    assert_eq!(b_mentions, 2);
}

#[test]
fn rips_guard_rejects_oversized_input() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pdflow(
        dir,
        &["synth", "circle", "--n", "12", "--seed", "4", "--out", "D.csv"],
    );
    let out = pdflow(
        dir,
        &["rips", "D.csv", "--out", "r.pdiag", "--max-points", "10"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("12"));
}

#[test]
fn pipeline_formats_reingest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pdflow(
        dir,
        &["synth", "periodic", "--period", "10", "--frames", "25", "--seed", "9", "--out", "orbit"],
    );
    // every stage consumes the previous stage's files
    assert!(pdflow(dir, &["quantize", "orbit", "--levels", "256", "--out", "orbit_q"]).status.success());
    assert!(pdflow(dir, &["field-pd", "orbit_q", "--out", "pd"]).status.success());
    assert!(pdflow(dir, &["distmat", "pd", "--metric", "w2", "--out", "D.csv"]).status.success());
    assert!(pdflow(dir, &["speed", "pd", "--metric", "w1", "--dt", "1.0", "--out", "s.csv"]).status.success());
    assert!(pdflow(dir, &["rips", "D.csv", "--out", "r.pdiag"]).status.success());
    assert!(pdflow(dir, &["cluster", "D.csv", "--theta", "0.1", "--out", "l.csv"]).status.success());
    assert!(pdflow(dir, &["subsample", "D.csv", "--delta", "0.2", "--out", "k.csv"]).status.success());
    // outputs re-load through the library
    assert!(pdflow_core::DiagramSet::load(dir.join("r.pdiag")).is_ok());
    assert!(pdflow_core::DistanceMatrix::load_csv(dir.join("D.csv")).is_ok());
    let speeds = fs::read_to_string(dir.join("s.csv")).unwrap();
    assert_eq!(speeds.lines().count(), 24);
    for line in speeds.lines() {
        line.parse::<f64>().unwrap();
    }
}
