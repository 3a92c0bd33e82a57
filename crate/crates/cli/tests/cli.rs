use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tangle-response"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn verify_passes_and_lists_r_identities() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema"], "tangle-response/1");
    assert_eq!(v["pass"], true);
    let checks = v["checks"].as_array().unwrap();
    let r = checks.iter().find(|c| c["name"] == "r_identities").expect("r_identities present");
    assert!(r["residual"].as_f64().unwrap() < 1e-10);
    for c in checks {
        assert!(c["residual"].is_f64() && c["tolerance"].is_f64(), "{c}");
    }
}

#[test]
fn verify_with_tampered_tolerance_fails() {
    let out = run(&["verify", "--tol-scale", "1e-300"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["pass"], false);
    assert!(v["failed"].as_array().unwrap().iter().any(|n| n == "r_identities"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("r_identities"));
}

#[test]
fn verify_rejects_bad_flags() {
    assert_eq!(run(&["verify", "--tol-scale", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--slope-q", "0.1,0.01"]).status.code(), Some(2));
}

#[test]
fn report_fixed_points() {
    let ghz = json(&run(&["report", "--alpha", "1.5707963267948966", "--beta", "0.7853981633974483", "--gamma", "0"]));
    assert_eq!(ghz["schema"], "tangle-response/1");
    for (key, want) in [("tau", 1.0), ("negativity", 1.0), ("eta", 4.0)] {
        assert!((ghz[key].as_f64().unwrap() - want).abs() < 1e-12, "{key}");
    }
    let w = json(&run(&["report", "--alpha", "0", "--beta", "0", "--gamma", "0"]));
    assert!(w["tau"].as_f64().unwrap().abs() < 1e-12);
    assert!((w["eta"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);
    let product = json(&run(&["report", "--alpha", "1.5707963267948966", "--beta", "0", "--gamma", "0"]));
    for key in ["tau", "negativity", "eta"] {
        assert!(product[key].as_f64().unwrap().abs() < 1e-12, "{key}");
    }
    assert!(product["omega_moduli"].as_array().unwrap().iter().all(|m| m.as_f64().unwrap().abs() < 1e-12));
}

#[test]
fn report_out_of_range_is_usage_error() {
    let out = run(&["report", "--alpha", "2", "--beta", "0", "--gamma", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["report", "--alpha", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
}

fn csv_rows(text: &str) -> (Vec<&str>, Vec<Vec<&str>>) {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# tangle-response"));
    let header = lines.next().unwrap().split(',').collect();
    (header, lines.map(|l| l.split(',').collect()).collect())
}

#[test]
fn fig1_csv_is_deterministic_and_respects_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = run(&["fig1", "--grid", "6", "--seed", "3", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let text = read(&a);
    assert_eq!(text, read(&b));
    assert!(text.lines().next().unwrap().contains("seed=3"));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["alpha", "beta", "gamma", "tau", "negativity", "eta", "family"]);
    for r in &rows {
        let tau: f64 = r[3].parse().unwrap();
        let eta: f64 = r[5].parse().unwrap();
        assert!(eta >= 2.0 * tau + 2.0 * tau.sqrt() - 1e-9);
        if r[6] == "G" {
            assert!((eta - 2.0 * tau - 2.0 * tau.sqrt()).abs() < 1e-9);
        }
        assert!(r[0].contains('e'));
    }
    let other = dir.path().join("c.csv");
    run(&["fig1", "--grid", "6", "--seed", "4", "--out", other.to_str().unwrap()]);
    assert_ne!(text, read(&other));
}

#[test]
fn fig2_csv_columns_and_ranges() {
    let out = run(&["fig2", "--grid", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["family", "param", "tau", "p", "q_tilde_c", "q_c", "avg_decay"]);
    for r in &rows {
        let q_c: f64 = r[5].parse().unwrap();
        assert!(q_c > 0.0 && q_c < 1.0);
    }
    let g_last = rows.iter().filter(|r| r[0] == "G").next_back().unwrap();
    let decay: f64 = g_last[6].parse().unwrap();
    assert!((decay - 4.0).abs() < 0.04);
}

#[test]
fn fig3_json_flags_both_families_convex() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f3.json");
    let out = run(&["fig3", "--grid", "21", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&read(&path)).unwrap();
    assert_eq!(v["schema"], "tangle-response/1");
    let curves = v["rows"].as_array().unwrap();
    assert_eq!(curves.len(), 2);
    assert_eq!(curves[0]["family"], "G");
    assert!(curves.iter().all(|c| c["convex"] == true));
    let mid = &curves[0]["points"][10];
    assert!((mid["p"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((mid["q_tilde_c"].as_f64().unwrap() - 0.25).abs() < 1e-10);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("x.csv");
    let out = run(&["fig3", "--grid", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn grid_below_two_is_usage_error() {
    assert_eq!(run(&["fig1", "--grid", "1"]).status.code(), Some(2));
}

#[test]
fn roof_two_qubit_matches_closed_form() {
    let out = run(&["roof", "--state", "2q:0.7853981633974483", "--q", "0.1", "--restarts", "16", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["oracle"].as_f64().unwrap() - 0.8).abs() < 1e-4);
    assert!(v["gap"].as_f64().unwrap() >= -1e-4);
}

#[test]
fn roof_three_qubit_ghz_bound() {
    let out = run(&["roof", "--state", "3q:1.5707963267948966,0.7853981633974483,0", "--q", "0.01", "--restarts", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["oracle"].as_f64().unwrap() <= 0.96 + 1e-4);
}

#[test]
fn roof_without_noise_returns_pure_measure() {
    let v = json(&run(&["roof", "--state", "3q:1.2,0.5,0.3", "--q", "0", "--restarts", "4"]));
    assert!((v["oracle"].as_f64().unwrap() - v["pure"].as_f64().unwrap()).abs() < 1e-10);
}

#[test]
fn roof_is_deterministic() {
    let args = ["roof", "--state", "2q:0.4", "--q", "0.3", "--restarts", "6", "--seed", "5"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn roof_rejects_bad_state() {
    assert_eq!(run(&["roof", "--state", "5q:1"]).status.code(), Some(2));
    assert_eq!(run(&["roof", "--state", "2q:2.0"]).status.code(), Some(2));
    assert_eq!(run(&["roof", "--state", "2q:0.3", "--m", "1"]).status.code(), Some(2));
}
