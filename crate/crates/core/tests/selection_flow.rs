use tabml::classifiers::Family;
use tabml::data::{derive_label, generate_synthetic, train_test_split, LabelRule, SynthSpec};
use tabml::model_selection::{benchmark, cross_validate, BenchmarkConfig, CvConfig, ParamGrid};
use tabml::pipeline::PipelineSpec;

fn table(rows: usize, seed: u64) -> tabml::data::DataTable {
    let t = generate_synthetic(&SynthSpec::benefits(rows, 0.81, seed)).unwrap();
    derive_label(&t, &LabelRule::default()).unwrap()
}

#[test]
fn cross_validation_refits_on_all_rows() {
    let t = table(900, 4);
    let spec = PipelineSpec::benefits_default().with_classifier(tabml::classifiers::ClassifierParams::default_for("lr").unwrap());
    let grid = ParamGrid::default_for("lr").unwrap();
    let out = cross_validate(&spec, &grid, &t, &CvConfig::default()).unwrap();
    assert_eq!(out.summary.cells.len(), 2);
    let best = out.summary.best().mean.unwrap();
    assert!(out.summary.cells.iter().all(|c| c.mean.unwrap() <= best));
    assert!(out.refit_minutes >= 0.0);
    // refit model reproduces when run again with the same seed
    let again = cross_validate(&spec, &grid, &t, &CvConfig::default()).unwrap();
    assert_eq!(serde_json::to_string(&again.model).unwrap(), serde_json::to_string(&out.model).unwrap());
}

#[test]
fn benchmark_keeps_requested_order_and_agrees_with_json() {
    let (train, test) = train_test_split(&table(1200, 5), 0.3, 5).unwrap();
    let config = BenchmarkConfig { families: vec![Family::Gbt, Family::Lr], cross_validate: false, ..BenchmarkConfig::default() };
    let report = benchmark(&PipelineSpec::benefits_default(), &train, &test, &config);
    let families: Vec<Family> = report.rows.iter().map(|r| r.family).collect();
    assert_eq!(families, vec![Family::Gbt, Family::Lr]);
    assert_eq!(report.failures(), 0);
    let text = report.to_table();
    let json: serde_json::Value = serde_json::to_value(&report).unwrap();
    for (line, row) in text.lines().skip(1).zip(json["rows"].as_array().unwrap()) {
        let cells: Vec<&str> = line.split_whitespace().collect();
        let precision: f64 = cells[2].parse().unwrap();
        assert!((precision - row["precision"].as_f64().unwrap()).abs() < 1e-6);
        let auc_pr: f64 = cells[5].parse().unwrap();
        assert!((auc_pr - row["auc_pr"].as_f64().unwrap()).abs() < 1e-6);
    }
}

#[test]
fn benchmark_reports_failures_per_family() {
    let (train, test) = train_test_split(&table(300, 6), 0.3, 6).unwrap();
    // a pipeline that reads a column the table lacks fails for every family
    let spec = PipelineSpec::indexed_categorical(&["NoSuchColumn"]);
    let config = BenchmarkConfig { families: vec![Family::Dt, Family::Svm], cross_validate: false, ..BenchmarkConfig::default() };
    let report = benchmark(&spec, &train, &test, &config);
    assert_eq!(report.failures(), 2);
    assert!(report.to_table().contains("FAILED"));
}
