use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use realstab_cli::{CheckReport, Problem, CONVERGENCE_HEADER};
use realstab_core::VerifyReport;

fn realstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_realstab")).args(args).output().unwrap()
}

fn problem(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for (json, want) in [
        (r#"{"f1":[1],"f2":[0]}"#, 0),
        (r#"{"f1":[0,1],"f2":[-0.25,0,1]}"#, 2),
        (r#"{"f1":[0,1],"f2":[0,1]}"#, 3),
    ] {
        let p = problem(dir.path(), "p.json", json);
        let out = realstab(&["check", p.to_str().unwrap(), "--n", "65"]);
        assert_eq!(code(&out), want, "{json}");
        let report: CheckReport = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report.exit_code, want);
    }
}

#[test]
fn parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = problem(dir.path(), "bad.json", r#"{"f1":[1]"#);
    assert_eq!(code(&realstab(&["check", bad.to_str().unwrap()])), 1);
    assert_eq!(code(&realstab(&["check", "/nonexistent/problem.json"])), 1);
    assert_eq!(code(&realstab(&["check"])), 1);
    assert_eq!(code(&realstab(&["frobnicate"])), 1);
}

#[test]
fn synth_configuration_and_stage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let ok = problem(dir.path(), "ok.json", r#"{"f1":[0,0,1],"f2":[-0.5,1]}"#);
    let out = realstab(&["synth", ok.to_str().unwrap(), "--n", "128"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));

    let non_poz = problem(dir.path(), "np.json", r#"{"f1":[0,1],"f2":[-0.25,0,1]}"#);
    let out = realstab(&["synth", non_poz.to_str().unwrap(), "--n", "65", "--out", dir.path().join("np").to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("poz_check"));

    let improper = problem(dir.path(), "hp.json", r#"{"f1":[1,1],"f2":[0,0,1],"half_plane":true,"den":[1,1]}"#);
    assert_eq!(code(&realstab(&["synth", improper.to_str().unwrap()])), 1);
}

#[test]
fn synth_writes_fields_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem(dir.path(), "p.json", r#"{"f1":[0,0,1],"f2":[-0.5,1]}"#);
    let out_dir = dir.path().join("out");
    let out = realstab(&["synth", p.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--dump-regions"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let report: VerifyReport = serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert!(report.pass);
    assert_eq!(report.grid_n, 129);
    let raw: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert!(raw["thresholds"].is_object());

    for name in ["g1", "g2", "u", "k", "phi", "log_f1", "e1", "e2", "s", "q"] {
        let csv = std::fs::read_to_string(out_dir.join(format!("{name}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,y,re,im"), "{name}");
        assert!(lines.next().is_some(), "{name} has no rows");
    }
    let header: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("fields.json")).unwrap()).unwrap();
    assert_eq!(header["n"], 129);
}

#[test]
fn convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem(dir.path(), "one.json", r#"{"f1":[1],"f2":[0]}"#);
    assert_eq!(code(&realstab(&["convergence", p.to_str().unwrap(), "--n", "129"])), 1);
    let out = realstab(&["convergence", p.to_str().unwrap(), "--n", "65,129"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CONVERGENCE_HEADER));
    for row in lines {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(cols[3].parse::<f64>().unwrap(), 0.0);
        assert_eq!(cols[7], "true");
    }
}

#[test]
fn corpus_is_seeded() {
    let a = realstab(&["gen-corpus", "--seed", "3", "--count", "5"]);
    let b = realstab(&["gen-corpus", "--seed", "3", "--count", "5"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let pairs: Vec<Problem> = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(pairs.len(), 5);
}
