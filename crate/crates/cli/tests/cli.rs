use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn hjet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjet")).args(args).output().expect("failed to run hjet")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is not JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn straddle_reports_the_exact_ratio() {
    let out = hjet(&["counterexample", "straddle", "--n", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    // 4 (16384/6561)^2
    assert_eq!(v["ratio"], "1073741824/43046721");
    assert_eq!(v["scaled_height"], "16384/6561");
    assert_eq!(v["exceeds_two"], true);
    let six = stdout_json(&hjet(&["counterexample", "straddle", "--n", "6"]));
    assert_eq!(six["exceeds_two"], false);
}

#[test]
fn decimal_output_mode() {
    let out = hjet(&["--decimal", "4", "counterexample", "straddle", "--n", "7"]);
    let v = stdout_json(&out);
    assert_eq!(v["scaled_height"], "2.4972");
}

#[test]
fn verify_passes_at_depth_eight() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("verify.json");
    let out = hjet(&["counterexample", "verify", "--depth", "8", "--out", path_str(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    let comps = v["component_increments"]["components"].as_array().unwrap();
    assert!(!comps.is_empty());
    for c in comps {
        assert_eq!(c["increment"], c["expected"]);
    }
    assert!(dir.path().join("metadata.json").exists());
}

#[test]
fn zero_jets_pass() {
    let out = hjet(&["jets", "check", "--input", &data("zero_jets.json"), "--m", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "pass");
    for field in ["F", "G", "H"] {
        for point in v["whitney_fields"][field]["profile"].as_array().unwrap() {
            assert_eq!(point["value"], "0/1");
        }
    }
    assert_eq!(v["ode"]["max_abs_residual"], "0/1");
}

#[test]
fn height_jump_fails_the_check() {
    let out = hjet(&["jets", "check", "--input", &data("jump_jets.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["verdict"], "fail");
}

#[test]
fn order_mismatch_is_a_usage_error() {
    let out = hjet(&["jets", "check", "--input", &data("zero_jets.json"), "--m", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("order"));
}

#[test]
fn bad_invocations_exit_with_two() {
    for args in [vec!["frobnicate"], vec!["counterexample", "straddle"], vec!["sieve", "--eps", "1/2"]] {
        let out = hjet(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
    let out = hjet(&["counterexample", "straddle", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lift_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("lifted.csv");
    let out = hjet(&["curve", "lift", "--input", &data("polyline.csv"), "--out", path_str(&target)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&target).unwrap(), fs::read_to_string(data("lift_expected.csv")).unwrap());
    let wrong = hjet(&["curve", "lift", "--input", &data("polyline_wrong_h.csv")]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn lp_ladder_matches_golden() {
    let out = hjet(&[
        "diff", "lp", "--input", &data("abs_samples.csv"), "--x", "1/2", "--m", "1", "--p", "1", "--ladder", "1/4,1/8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), fs::read_to_string(data("lp_expected.csv")).unwrap());
}

#[test]
fn density_is_one_for_huge_eps() {
    let out = hjet(&[
        "diff", "density", "--counterexample", "--depth", "4", "--x", "1/3", "--m", "2", "--eps", "1000000", "--radius",
        "1/8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["density"], "1/1");
}

fn build_into(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let out = hjet(&["counterexample", "build", "--depth", "4", "--samples", "64", "--out-dir", path_str(dir)]);
    assert_eq!(out.status.code(), Some(0));
    let mut files: Vec<(PathBuf, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (PathBuf::from(p.file_name().unwrap()), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn build_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = build_into(a.path());
    let second = build_into(b.path());
    assert_eq!(first, second);
    let names: Vec<_> = first.iter().map(|(p, _)| p.to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["components.csv", "curve.csv", "intervals.json", "metadata.json", "samples.csv"]);
    for (_, bytes) in &first {
        assert!(!bytes.contains(&b'\r'));
    }
    let comps = String::from_utf8(first[0].1.clone()).unwrap();
    assert_eq!(comps.lines().next(), Some("level,index,center,lo,hi"));
    assert_eq!(comps.lines().nth(1), Some("1,0,1/2,63/128,65/128"));
}

#[test]
fn sieve_writes_its_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = hjet(&[
        "sieve", "--counterexample", "--depth", "4", "--eps", "1/2", "--grid", "256", "--n-max", "2", "--ladder", "4..6",
        "--out-dir", path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let retained: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("retained.json")).unwrap()).unwrap();
    let first = &retained.as_array().unwrap()[0];
    assert_eq!(first["lo"], "0/1");
    let modulus: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("modulus.json")).unwrap()).unwrap();
    assert_eq!(modulus["profile"].as_array().unwrap().len(), 3);
    assert!(dir.path().join("metadata.json").exists());
}
