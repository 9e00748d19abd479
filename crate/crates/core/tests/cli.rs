//! End-to-end checks of the `casimir` binary.

use std::path::Path;
use std::process::{Command, Output};

fn casimir(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_clear()
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&casimir(dir.path(), &[])), 2);
    assert_eq!(code(&casimir(dir.path(), &["pressure", "--approach", "5"])), 2);
    assert_eq!(code(&casimir(dir.path(), &["synth", "--outlier-set", "99"])), 2);

    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    let o = casimir(dir.path(), &["--config", empty.to_str().unwrap(), "table-fixtures"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    let o = Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(["--out-dir", dir.path().to_str().unwrap(), "table-fixtures"])
        .env_clear()
        .env("CASIMIR_THEORY__TOLERANCE", "-1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_data_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = casimir(dir.path(), &["compare", "--approach", "4", "--data", "/nonexistent/sets.csv"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn pressure_writes_csv_json_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = casimir(dir.path(), &["pressure", "--approach", "3", "--z-min", "160", "--z-max", "300", "--points", "3"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("pressure_approach3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let m = json(&dir.path().join("manifest_pressure.json"));
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 2);
}

#[test]
fn table_fixtures_reports_differences() {
    let dir = tempfile::tempdir().unwrap();
    let o = casimir(dir.path(), &["table-fixtures"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("2 of 50 golden values outside tolerance"));
    let diff = std::fs::read_to_string(dir.path().join("fixture_diff.csv")).unwrap();
    assert_eq!(diff.lines().count(), 51);
}

#[test]
fn compare_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&casimir(dir.path(), &["synth"])), 0);
    let data = dir.path().join("sets.csv");
    let data = data.to_str().unwrap();

    let o = casimir(dir.path(), &["compare", "--approach", "4", "--data", data]);
    assert_eq!(code(&o), 0);
    let v = json(&dir.path().join("verdict_approach4_95.json"));
    assert_eq!(v["consistent"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
    let f = v["fraction_outside"].as_f64().unwrap();
    assert!((0.03..=0.07).contains(&f), "{f}");

    let o = casimir(dir.path(), &["compare", "--approach", "2", "--data", data]);
    assert_eq!(code(&o), 5);
    let v = json(&dir.path().join("verdict_approach2_95.json"));
    assert_eq!(v["consistent"], false);
    assert_eq!(v["rows"][0]["outside"], true);
}
