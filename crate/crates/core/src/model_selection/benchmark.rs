use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{cross_validate, scored_columns, CvConfig, ParamGrid, SelectionError};
use crate::classifiers::{ClassifierParams, Family};
use crate::data::DataTable;
use crate::evaluation::EvalReport;
use crate::pipeline::{FittedPipeline, PipelineSpec, StageSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub families: Vec<Family>,
    pub cv: CvConfig,
    /// Grid-search each family before the final fit; otherwise fit default parameters once.
    pub cross_validate: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self { families: Family::ALL.to_vec(), cv: CvConfig::default(), cross_validate: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub family: Family,
    /// Wall-clock minutes for selection plus the final fit.
    pub fit_minutes: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub auc_roc: Option<f64>,
    pub auc_pr: Option<f64>,
    pub params: Option<ClassifierParams>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// Fixed-width text table, one line per family.
    pub fn to_table(&self) -> String {
        let header = ["Model", "Comp Time (mins)", "Precision", "Recall", "AUC ROC", "AUC PR"];
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
        let mut lines = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
        for r in &self.rows {
            let mut line = vec![r.family.display_name().to_string(), format!("{:.4}", r.fit_minutes)];
            match &r.error {
                Some(e) => line.push(format!("FAILED: {e}")),
                None => line.extend([fmt(r.precision), fmt(r.recall), fmt(r.auc_roc), fmt(r.auc_pr)]),
            }
            lines.push(line);
        }
        let mut widths = vec![0; header.len()];
        for line in &lines {
            for (w, cell) in widths.iter_mut().zip(line) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        for line in &lines {
            let cells: Vec<String> = line.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

fn label_col(spec: &PipelineSpec) -> Option<String> {
    match spec.stages.last() {
        Some(StageSpec::Classifier { label_col, .. }) => Some(label_col.clone()),
        _ => None,
    }
}

fn run_one(
    spec: &PipelineSpec,
    train: &DataTable,
    test: &DataTable,
    family: Family,
    config: &BenchmarkConfig,
) -> Result<(FittedPipeline, ClassifierParams, f64, EvalReport), SelectionError> {
    let start = Instant::now();
    let grid = ParamGrid::default_for(family.tag())?;
    let spec = spec.with_classifier(grid.base.clone());
    let (model, params) = if config.cross_validate {
        let outcome = cross_validate(&spec, &grid, train, &config.cv)?;
        let params = outcome.summary.best().params.clone();
        (outcome.model, params)
    } else {
        (spec.fit(train)?, grid.base.clone())
    };
    let minutes = start.elapsed().as_secs_f64() / 60.0;
    let label = label_col(&spec).ok_or(SelectionError::NoClassifier)?;
    let scored = model.transform(test)?;
    let (scores, predictions, labels) = scored_columns(&scored, &label)?;
    let report = EvalReport::compute(&scores, &predictions, &labels)?;
    Ok((model, params, minutes, report))
}

/// Fits every requested family on `train` and scores it on `test`. A failing family yields
/// a row with `error` set; the rest still run. Rows follow the requested order.
pub fn benchmark(spec: &PipelineSpec, train: &DataTable, test: &DataTable, config: &BenchmarkConfig) -> BenchmarkReport {
    let mut families: Vec<Family> = Vec::new();
    for f in &config.families {
        if !families.contains(f) {
            families.push(*f);
        }
    }
    let rows = families
        .into_iter()
        .map(|family| {
            let start = Instant::now();
            match run_one(spec, train, test, family, config) {
                Ok((_, params, fit_minutes, report)) => BenchmarkRow {
                    family,
                    fit_minutes,
                    precision: Some(report.metrics.precision),
                    recall: Some(report.metrics.recall),
                    auc_roc: report.auc_roc,
                    auc_pr: report.auc_pr,
                    params: Some(params),
                    error: None,
                },
                Err(e) => BenchmarkRow {
                    family,
                    fit_minutes: start.elapsed().as_secs_f64() / 60.0,
                    precision: None,
                    recall: None,
                    auc_roc: None,
                    auc_pr: None,
                    params: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    BenchmarkReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let report = BenchmarkReport {
            rows: vec![
                BenchmarkRow {
                    family: Family::Lr,
                    fit_minutes: 0.5,
                    precision: Some(0.81),
                    recall: Some(1.0),
                    auc_roc: Some(0.6),
                    auc_pr: Some(0.85),
                    params: None,
                    error: None,
                },
                BenchmarkRow {
                    family: Family::Gbt,
                    fit_minutes: 0.0,
                    precision: None,
                    recall: None,
                    auc_roc: None,
                    auc_pr: None,
                    params: None,
                    error: Some("boom".into()),
                },
            ],
        };
        let t = report.to_table();
        let lines: Vec<&str> = t.lines().collect();
        assert!(lines[0].starts_with("Model  Comp Time (mins)  Precision"));
        assert!(lines[1].starts_with("LR     0.5000"));
        assert!(lines[2].contains("FAILED: boom"));
        assert_eq!(report.failures(), 1);
    }
}
