//! End-to-end runs of the `eis` binary: exit codes and artifact determinism.

use std::process::Command;

fn eis(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_eis")).args(args).output().expect("binary runs")
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("eis-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn verify_siegel_passes() {
    let out = eis(&["verify-siegel", "--n", "1", "--p", "3", "--k", "6", "--dets", "1,3,9", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 3);
    assert!(recs.iter().all(|r| r["equal"] == true));
}

#[test]
fn weight_below_bound_is_usage_error() {
    let out = eis(&["build", "--n", "1", "--N", "3", "--k", "1", "--chi", "kron:-3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("precondition"));
}

#[test]
fn bad_flag_is_usage_error() {
    assert_eq!(eis(&["build", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(eis(&["build", "--chi", "nonsense"]).status.code(), Some(2));
}

#[test]
fn small_prime_is_labelled_not_failed() {
    let out = eis(&["check-integrality", "--p", "5", "--k", "6", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reports"][0]["label"], "outside theorem hypotheses");
}

#[test]
fn build_then_check_from_file() {
    let path = tmp("exp.json");
    let out = eis(&["build", "--n", "1", "--N", "4", "--k", "5", "--chi", "odd4", "--bound", "8", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = eis(&["check-integrality", "--in", path.to_str().unwrap(), "--p", "13"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("within theorem hypotheses"));
}

#[test]
fn artifacts_identical_across_thread_counts() {
    let run = |threads: &str, name: &str| {
        let path = tmp(name);
        let out = eis(&["raise", "--N", "4", "--k", "7", "--chi", "odd4", "--m0", "1", "--bound", "6", "--threads", threads, "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("1", "a.json"), run("3", "b.json"));
}

#[test]
fn pullback_json_shape() {
    let out = eis(&["pullback", "--N", "4", "--k", "7", "--chi", "odd4", "--m0", "1", "--bound", "6", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["cuspidal"], true);
    let c = &v["coeffs"][0];
    assert!(c.get("a").is_some() && c.get("b").is_some() && c.get("value").is_some());
}

#[test]
fn archimedean_grid_passes() {
    let out = eis(&["verify-archimedean"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(eis(&["verify-archimedean", "--l", "2", "--m", "1"]).status.code(), Some(2));
}
