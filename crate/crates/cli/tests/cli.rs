use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dilute(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dilute"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("DILUTE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn commutant_table_has_thirty_monomials() {
    let dir = tempfile::tempdir().unwrap();
    let out = dilute(&["commutant", "--k", "4", "--n", "4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("commutant.csv")).unwrap();
    assert_eq!(data_rows(&csv).len(), 30);
    let doc = json(&dir.path().join("commutant.json"));
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["result"]["monomials"].as_array().unwrap().len(), 30);
    assert_eq!(doc["result"]["pseudo_flag"], false);
    assert!(doc["manifest"]["wall_time_seconds"].is_number());
}

#[test]
fn vandermonde_bounds_hold_at_eight() {
    let dir = tempfile::tempdir().unwrap();
    let out = dilute(&["vandermonde", "--k", "8"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("all bounds satisfied true"));
    let csv = fs::read_to_string(dir.path().join("vandermonde.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 3] = [
        (&["frame-potential", "--spec", "homeopathy:3:1:haar", "--k", "2", "--samples", "500", "--seed", "4"], "frame_potential.csv"),
        (&["distinguish", "--n", "4", "--t", "1", "--trials", "30", "--seed", "5"], "distinguish.csv"),
        (&["decay", "--n", "2", "--k", "1", "--t", "1..2", "--samples", "300", "--seed", "6"], "decay.csv"),
    ];
    for (args, file) in cases {
        assert!(dilute(args, a.path()).status.success());
        assert!(dilute(args, b.path()).status.success());
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
}

#[test]
fn csv_header_carries_manifest_without_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = dilute(&["frame-potential", "--spec", "clifford:1", "--k", "2", "--samples", "100", "--seed", "9"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("frame_potential.csv")).unwrap();
    assert!(csv.contains("# schema_version=1"));
    assert!(csv.contains("# seed=9"));
    assert!(csv.contains("# spec={"));
    assert!(!csv.contains("wall_time"));
    assert!(csv.contains("spec,k,samples,seed,value,stderr,exact"));
}

#[test]
fn decay_csv_is_monotone_above_floor() {
    let dir = tempfile::tempdir().unwrap();
    let out = dilute(
        &["decay", "--n", "3", "--k", "1", "--t", "1..3", "--samples", "2000", "--seed", "7", "--replicates", "8"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&dir.path().join("decay.json"));
    assert_eq!(doc["result"]["monotone_above_floor"], true);
    let csv = fs::read_to_string(dir.path().join("decay.csv")).unwrap();
    let ts: Vec<&str> = data_rows(&csv).iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(ts, ["1", "2", "3"]);
}

#[test]
fn distinguish_reports_advantage_and_copies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dilute(&["distinguish", "--n", "6", "--t", "0", "--trials", "60", "--seed", "1"], dir.path());
    assert!(out.status.success());
    let doc = json(&dir.path().join("distinguish.json"));
    assert_eq!(doc["result"]["copies"], 10);
    assert_eq!(doc["result"]["l"], 2);
    assert!(doc["result"]["advantage"].as_f64().unwrap() >= 0.125);
    let csv = fs::read_to_string(dir.path().join("distinguish.csv")).unwrap();
    assert_eq!(data_rows(&csv).len(), 120);
}

#[test]
fn twirl_check_passes_for_small_cases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dilute(&["twirl-check", "--k", "3", "--n", "1", "--inputs", "2", "--seed", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 unexpected mismatches"));
}

#[test]
fn output_directory_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_dilute"))
        .args(["vandermonde", "--k", "3"])
        .env("DILUTE_OUT_DIR", dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(dir.path().join("vandermonde.json").exists());
}

#[test]
fn validation_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_spec = dilute(&["frame-potential", "--spec", "bogus:2", "--k", "2", "--samples", "10", "--seed", "1"], dir.path());
    assert_eq!(bad_spec.status.code(), Some(2));
    let unknown_flag = dilute(&["vandermonde", "--k", "3", "--frobnicate"], dir.path());
    assert_eq!(unknown_flag.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown_flag.stderr).contains("Usage"));
    let missing_seed = dilute(&["distinguish", "--n", "3", "--t", "0", "--trials", "5"], dir.path());
    assert_eq!(missing_seed.status.code(), Some(2));
    let too_large = dilute(&["vandermonde", "--k", "40"], dir.path());
    assert_eq!(too_large.status.code(), Some(2));
    let bad_range = dilute(&["decay", "--n", "2", "--k", "1", "--t", "3..1", "--samples", "10", "--seed", "1"], dir.path());
    assert_eq!(bad_range.status.code(), Some(2));
}

#[test]
fn help_documents_csv_columns() {
    let out = Command::new(env!("CARGO_BIN_EXE_dilute")).args(["decay", "--help"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("CSV columns"));
}
