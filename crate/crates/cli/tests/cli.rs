use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dirbias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirbias")).args(args).output().expect("spawn dirbias")
}

fn simulate_into(dir: &Path) -> Output {
    dirbias(&[
        "simulate",
        "--seeds",
        "0..6",
        "--scheme",
        "sgd:sgd:0.1x10,0.01x30",
        "--scheme",
        "gd:gd:0.5x10,0.05x30",
        "--output-dir",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn simulate_writes_runs_and_batch() {
    let tmp = tempfile::tempdir().unwrap();
    let out = simulate_into(tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("batch.json").exists());
    assert!(tmp.path().join("seed5_gd.csv").exists());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("sgd") && stdout.contains("gd"));
}

#[test]
fn compare_reads_a_batch() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(simulate_into(tmp.path()).status.success());
    let batch = tmp.path().join("batch.json");
    let batch = batch.to_str().unwrap();
    let out = dirbias(&["compare", "--batch", batch, "--metric", "rq", "--a", "sgd", "--b", "gd"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("p"));
    let same = dirbias(&["compare", "--batch", batch, "--metric", "rq", "--a", "sgd", "--b", "sgd"]);
    assert_eq!(same.status.code(), Some(1));
}

#[test]
fn theorems_emits_json_report() {
    let out = dirbias(&["theorems", "--runs", "20"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json report");
    assert!(report["entries"].as_array().unwrap().len() >= 5);
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
}

#[test]
fn theorems_rejects_bad_epsilon() {
    let out = dirbias(&["theorems", "--runs", "5", "--epsilon", "-0.5"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn verify_spectral_on_generated_and_loaded_matrices() {
    let out = dirbias(&["verify-spectral", "--n", "8", "--dim", "5000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.is_object());

    let tmp = tempfile::tempdir().unwrap();
    let eye = tmp.path().join("eye.csv");
    fs::write(&eye, "1,0,0\n0,1,0\n0,0,1\n").unwrap();
    let out = dirbias(&["verify-spectral", "--matrix", eye.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let rect = tmp.path().join("rect.csv");
    fs::write(&rect, "1,0,0\n0,1,0\n").unwrap();
    let out = dirbias(&["verify-spectral", "--matrix", rect.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
