use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn blidkit(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blidkit"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("BLIDKIT_OUT")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn resonances_of_diag_two_half() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("resonances_diag.json");
    let out = blidkit(dir.path(), &["cohomo", "resonances", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "cohomo_resonances.json");
    let hits: Vec<Vec<u64>> = r["result"]["resonances"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["multi_index"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect())
        .collect();
    assert_eq!(hits, vec![vec![1, 1], vec![2, 2]]);
}

#[test]
fn extend_ray_agrees_below_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("extend_integral.json");
    let out = blidkit(dir.path(), &["extend", "--input", input.to_str().unwrap(), "--samples", "100"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("extend.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("scale,sup_norm,f,F,difference"));
    let mut inside = 0;
    let mut undefined = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let sup: f64 = cols[1].parse().unwrap();
        if sup < 1.0 / 3.0 {
            inside += 1;
            assert_eq!(cols[2], cols[3], "f and F differ at sup norm {sup}");
        }
        if cols[2].is_empty() {
            undefined += 1;
            assert!(cols[3].parse::<f64>().unwrap().is_finite());
        }
    }
    assert!(inside > 5);
    assert!(undefined > 0);
    let r = report(dir.path(), "extend.json");
    assert!(r["result"]["far"]["extended"].as_f64().unwrap().is_finite());
    assert!(r["result"]["far"]["raw_error"].is_string());
}

#[test]
fn borel_reads_back_the_jet() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("jet_m2_j4.json");
    let out = blidkit(dir.path(), &["borel", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "borel.json");
    assert!(r["result"]["max_rel_error"].as_f64().unwrap() <= 1e-4);
    let rows = fs::read_to_string(dir.path().join("borel.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 20 * 5);
}

#[test]
fn cohomo_solve_saddle() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("cohomo_saddle.json");
    let out = blidkit(dir.path(), &["cohomo", "solve", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "cohomo_solve.json");
    let residuals = r["result"]["report"]["residuals"].as_array().unwrap();
    let global = residuals.last().unwrap();
    assert_eq!(global["samples"].as_u64(), Some(10_000));
    assert!(global["max_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn resonant_problem_fails_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("cohomo_resonant.json");
    let out = blidkit(dir.path(), &["cohomo", "solve", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = report(dir.path(), "error.json");
    assert_eq!(err["error"], "CheckFailed");
    assert_eq!(err["kind"], "SingularResonance");
    assert!(err["message"].as_str().unwrap().contains("[1, 1]"));
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"A": [[0.5, 0.0], [0.0]], "degree_cap": 2, "tol": 1e-8}"#).unwrap();
    let out = blidkit(dir.path(), &["cohomo", "solve", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "ParseError");

    let out = blidkit(dir.path(), &["borel"]);
    assert_eq!(out.status.code(), Some(2));
    let out = blidkit(dir.path(), &["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "Usage");
}

#[test]
fn blid_show_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let out = blidkit(dir.path(), &["blid", "show", "--samples", "201"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("blid_profile.csv")).unwrap();
    assert_eq!(csv.lines().count(), 202);
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(v[6].abs() <= 0.5);
        if v[0].abs() < 1.0 / 3.0 {
            assert_eq!(v[6], v[0]);
        }
    }
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let input = data("cohomo_flat.json");
    for dir in [a.path(), b.path()] {
        let out = blidkit(dir, &["cohomo", "solve", "--input", input.to_str().unwrap(), "--seed", "5"]);
        assert_eq!(out.status.code(), Some(0));
        let out = blidkit(dir, &["extend", "--seed", "5", "--samples", "50"]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["cohomo_solve.json", "cohomo_profile.csv", "extend.json", "extend.csv", "extend_ball.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn selftest_passes_and_env_sets_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_blidkit"))
        .args(["selftest", "--samples", "20", "--seed", "2"])
        .env("BLIDKIT_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(dir.path(), "selftest.json");
    assert_eq!(r["passed"], true);
    assert!(r.get("elapsed_seconds").is_none());
}
