use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn anosov(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anosov"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .env_remove("ANOSOV_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path, task: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{task}.json"))).expect("summary written");
    serde_json::from_str(&text).expect("summary is JSON")
}

fn keys(v: &Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

#[test]
fn certify_reference_point_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = anosov(dir.path(), &["certify", "--delta", "0.01", "--alpha", "0.11872"]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(dir.path(), "certify");
    assert_eq!(s["status"], "ok");
    assert_eq!(s["results"]["report"]["overall"], true);
    let threshold = s["results"]["certified_delta_threshold"].as_f64().unwrap();
    assert!((0.0105..=0.0111).contains(&threshold));
    assert_eq!(s["config_hash"].as_str().unwrap().len(), 64);

    let out = anosov(dir.path(), &["certify", "--delta", "0.02"]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(dir.path(), "certify");
    assert_eq!(s["results"]["report"]["overall"], false);
    assert_eq!(s["results"]["report"]["diffeo"]["pass"], false);
}

#[test]
fn linear_map_variance_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = anosov(dir.path(), &["variance", "--map", "cat", "--n", "16", "--N", "64"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path(), "variance");
    assert!((s["results"]["sigma2"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    // the summary is echoed on stdout as well
    let echoed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(echoed["results"], s["results"]);
}

#[test]
fn rate_table_has_one_row_per_s() {
    let dir = tempfile::tempdir().unwrap();
    let out = anosov(dir.path(), &["rate", "--s", "0:0.1:1.8", "--scheme", "fejer", "--n", "8", "--N", "32"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("rate_table.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(lines.next().unwrap(), "s,z_star,r,iterations,boundary_flag");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 19);
    assert!(rows[0][2].abs() < 1e-8);
    assert!(rows.iter().all(|r| r[2] >= -1e-8));
}

#[test]
fn srb_and_ulam_write_grid_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = anosov(dir.path(), &["srb", "--n", "8", "--N", "32"]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = std::fs::read(dir.path().join("srb_density.grid")).unwrap();
    assert!(bytes.starts_with(b"GRID 32 32 real\n"));
    assert_eq!(bytes.len(), 16 + 32 * 32 * 8);
    let s = summary(dir.path(), "srb");
    assert!((s["results"]["mass"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let out = anosov(dir.path(), &["ulam", "--boxes", "16", "--samples", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = std::fs::read(dir.path().join("ulam_density.grid")).unwrap();
    assert!(bytes.starts_with(b"GRID 16 16 real\n"));
    assert!(summary(dir.path(), "ulam")["results"]["sigma2"].as_f64().unwrap() > 0.0);
}

#[test]
fn bump_without_epsilon_is_matched() {
    let dir = tempfile::tempdir().unwrap();
    let out = anosov(dir.path(), &["variance", "--scheme", "bump", "--n", "8", "--N", "128"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path(), "variance");
    assert!(s["results"]["epsilon_match"]["epsilon"].as_f64().unwrap() > 0.0);

    let out = anosov(dir.path(), &["variance", "--scheme", "bump", "--no-auto-match", "--n", "8", "--N", "128"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(anosov(dir.path(), &["variance", "--n", "32", "--N", "32"]).status.code(), Some(1));
    assert_eq!(anosov(dir.path(), &["variance", "--n", "12"]).status.code(), Some(1));
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "colour = 1\n").unwrap();
    let out = anosov(dir.path(), &["variance", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_with_two_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = anosov(dir.path(), &["lambda-curve", "--n", "4", "--N", "16", "--z", "400"]);
    assert_eq!(out.status.code(), Some(2));
    let s = summary(dir.path(), "lambda-curve");
    assert_eq!(s["status"], "numerical");
    assert!(s["error"].as_str().unwrap().contains("overflow"));
    assert!(s["results"].is_null());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 4\nN = 16\n[map]\nname = \"cat\"\n").unwrap();
    let out = anosov(dir.path(), &["variance", "--config", cfg.to_str().unwrap(), "--n", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path(), "variance");
    assert_eq!(s["config"]["n"], 8);
    assert_eq!(s["config"]["N"], 16);
    assert_eq!(s["config"]["map"], "cat");
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_anosov"))
        .args(["certify"])
        .env("ANOSOV_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("certify.json").exists());
}

#[test]
fn summaries_are_schema_stable_and_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["lambda-curve", "--n", "4", "--N", "16", "--z", "-0.5,0,0.5", "--threads", "1"];
    assert_eq!(anosov(a.path(), &args).status.code(), Some(0));
    assert_eq!(anosov(b.path(), &args).status.code(), Some(0));
    let (sa, sb) = (summary(a.path(), "lambda-curve"), summary(b.path(), "lambda-curve"));
    assert_eq!(sa["results"], sb["results"]);
    assert_eq!(sa["config_hash"], sb["config_hash"]);

    let other = ["lambda-curve", "--n", "8", "--N", "32", "--z", "0.25"];
    assert_eq!(anosov(b.path(), &other).status.code(), Some(0));
    let sc = summary(b.path(), "lambda-curve");
    assert_eq!(keys(&sa), keys(&sc));
    assert_eq!(keys(&sa["results"]), keys(&sc["results"]));
    assert_ne!(sa["config_hash"], sc["config_hash"]);
}
