use std::path::Path;
use std::process::{Command, Output};

fn tabml(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tabml")).args(args).current_dir(dir).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = tabml(dir, args);
    assert!(out.status.success(), "tabml {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fixture(dir: &Path, rows: &str) {
    ok(dir, &["synth", "--rows", rows, "--seed", "2", "--out", "s.csv"]);
    ok(dir, &["ingest", "--input", "s.csv", "--schema", "s.schema.json", "--out", "d.tbl"]);
}

#[test]
fn ingest_is_deterministic_and_reports_missing_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fixture(dir, "200");
    let summary = ok(dir, &["ingest", "--input", "s.csv", "--schema", "s.schema.json", "--out", "again.tbl"]);
    assert!(summary.starts_with("rows 200\n"));
    assert_eq!(std::fs::read(dir.join("d.tbl")).unwrap(), std::fs::read(dir.join("again.tbl")).unwrap());

    let out = tabml(dir, &["ingest", "--input", "s.csv", "--schema", "missing.json", "--out", "x.tbl"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
}

#[test]
fn train_rejects_unknown_family_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fixture(dir, "600");
    let out = tabml(dir, &["train", "--data", "d.tbl", "--model", "xgb", "--out", "m.bin"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("lr, dt, rf, fm, gbt, svm"));

    std::fs::write(dir.join("grid.json"), r#"[{"name": "maxDepth", "values": [2, 4]}]"#).unwrap();
    for name in ["a.bin", "b.bin"] {
        ok(dir, &["train", "--data", "d.tbl", "--model", "dt", "--grid", "grid.json", "--seed", "5", "--out", name]);
    }
    assert_eq!(std::fs::read(dir.join("a.bin")).unwrap(), std::fs::read(dir.join("b.bin")).unwrap());
    assert_eq!(&std::fs::read(dir.join("a.bin")).unwrap()[..8], b"TABMLMOD");
}

#[test]
fn evaluate_flags_in_sample_and_predict_writes_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fixture(dir, "500");
    ok(dir, &["train", "--data", "d.tbl", "--model", "lr", "--no-cv", "--train-out", "tr.tbl", "--test-out", "te.tbl", "--out", "m.bin"]);
    let held_out = ok(dir, &["evaluate", "--model", "m.bin", "--data", "te.tbl", "--out", "r.json"]);
    assert!(!held_out.contains("in-sample"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["rows"], 150);
    assert_eq!(report["in_sample"], false);
    let own = ok(dir, &["evaluate", "--model", "m.bin", "--data", "tr.tbl"]);
    assert!(own.contains("in-sample"));

    ok(dir, &["predict", "--model", "m.bin", "--data", "te.tbl", "--out", "p.csv"]);
    let text = std::fs::read_to_string(dir.join("p.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("features,prediction,rawScore,probability"));
    assert_eq!(text.lines().count(), 151);
}

#[test]
fn importance_names_supported_families() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fixture(dir, "300");
    ok(dir, &["train", "--data", "d.tbl", "--model", "svm", "--no-cv", "--out", "m.bin"]);
    let out = tabml(dir, &["importance", "--model", "m.bin"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt, rf, gbt"));
}

#[test]
fn benchmark_subset_in_requested_order() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fixture(dir, "800");
    let text = ok(dir, &["benchmark", "--data", "d.tbl", "--models", "gbt,lr", "--no-cv", "--out", "bench"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("Model"));
    assert!(lines[1].starts_with("GBT"));
    assert!(lines[2].starts_with("LR"));
    assert_eq!(std::fs::read_to_string(dir.join("bench/benchmark.txt")).unwrap(), text);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("bench/benchmark.json")).unwrap()).unwrap();
    assert_eq!(json["rows"][0]["family"], "gbt");
}

#[test]
fn split_and_sample_sizes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fixture(dir, "1000");
    let s = ok(dir, &["split", "--data", "d.tbl", "--test-fraction", "0.3", "--train-out", "a.tbl", "--test-out", "b.tbl"]);
    assert_eq!(s.trim(), "train rows 700, test rows 300");
    let s = ok(dir, &["sample", "--data", "d.tbl", "--fraction", "0.1", "--out", "c.tbl"]);
    assert_eq!(s.trim(), "kept 100 of 1000 rows");
}
