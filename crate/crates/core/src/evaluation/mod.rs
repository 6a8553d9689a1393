//! Confusion counts, threshold metrics, ROC and precision-recall curves, and fit timing.

mod curves;
mod report;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curves::{pr_curve, roc_curve, CurvePoint, PrCurve, RocCurve};
pub use report::{write_curve_csv, EvalReport};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{scores} scores but {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("no rows to evaluate")]
    Empty,
    #[error("ROC needs both classes; found only class {0}")]
    SingleClass(u8),
    #[error("precision-recall needs at least one positive row")]
    NoPositives,
    #[error("score at row {0} is not finite")]
    NonFinite(usize),
    #[error("label {0} is not 0 or 1")]
    BadLabel(u8),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub r#fn: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, false_negatives: u64) -> Self {
        Self { tp, fp, tn, r#fn: false_negatives }
    }

    pub fn from_predictions(predicted: &[u8], actual: &[u8]) -> Result<Self, EvalError> {
        if predicted.len() != actual.len() {
            return Err(EvalError::LengthMismatch { scores: predicted.len(), labels: actual.len() });
        }
        let mut c = Self::default();
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (1, 1) => c.tp += 1,
                (1, 0) => c.fp += 1,
                (0, 0) => c.tn += 1,
                (0, 1) => c.r#fn += 1,
                (bad, 0 | 1) | (_, bad) => return Err(EvalError::BadLabel(bad)),
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.r#fn
    }
}

/// Metrics derived from one confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

/// Precision is 1 when nothing is predicted positive, recall is 1 when nothing is
/// actually positive, F1 is 0 when both are 0.
pub fn scalar_metrics(c: &ConfusionCounts) -> ScalarMetrics {
    let (tp, fp, tn, fneg) = (c.tp as f64, c.fp as f64, c.tn as f64, c.r#fn as f64);
    let precision = if c.tp + c.fp == 0 { 1.0 } else { tp / (tp + fp) };
    let recall = if c.tp + c.r#fn == 0 { 1.0 } else { tp / (tp + fneg) };
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    let total = c.total();
    let accuracy = if total == 0 { 0.0 } else { (tp + tn) / total as f64 };
    ScalarMetrics { precision, recall, f1, accuracy }
}

/// Runs `f` and returns its result with the elapsed wall-clock time in minutes.
pub fn timed_fit<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() / 60.0)
}

pub(crate) fn check_inputs(scores: &[f64], labels: &[u8]) -> Result<(), EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    if scores.is_empty() {
        return Err(EvalError::Empty);
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::NonFinite(i));
    }
    if let Some(&l) = labels.iter().find(|&&l| l > 1) {
        return Err(EvalError::BadLabel(l));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_confusion() {
        let m = scalar_metrics(&ConfusionCounts::new(11699, 2713, 0, 3));
        assert!((m.precision - 11699.0 / 14412.0).abs() < 1e-15);
        assert!((m.recall - 11699.0 / 11702.0).abs() < 1e-15);
        assert!((m.accuracy - 11699.0 / 14415.0).abs() < 1e-15);
        let f1 = 2.0 * 11699.0 / (2.0 * 11699.0 + 2713.0 + 3.0);
        assert!((m.f1 - f1).abs() < 1e-12);
    }

    #[test]
    fn degenerate_conventions() {
        let m = scalar_metrics(&ConfusionCounts::new(0, 0, 5, 0));
        assert_eq!((m.precision, m.recall), (1.0, 1.0));
        let m = scalar_metrics(&ConfusionCounts::new(0, 3, 0, 4));
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn counts_from_predictions() {
        let c = ConfusionCounts::from_predictions(&[1, 1, 0, 0], &[1, 0, 0, 1]).unwrap();
        assert_eq!(c, ConfusionCounts::new(1, 1, 1, 1));
        assert!(ConfusionCounts::from_predictions(&[1], &[1, 0]).is_err());
        assert!(ConfusionCounts::from_predictions(&[2], &[1]).is_err());
    }

    #[test]
    fn timing_a_sleep() {
        let ((), mins) = timed_fit(|| std::thread::sleep(std::time::Duration::from_millis(50)));
        assert!((0.0008..=0.01).contains(&mins), "{mins}");
    }
}
