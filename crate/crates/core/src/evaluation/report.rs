use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{pr_curve, roc_curve, scalar_metrics, ConfusionCounts, CurvePoint, EvalError, ScalarMetrics};

/// Everything reported about one model on one evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: usize,
    pub confusion: ConfusionCounts,
    pub metrics: ScalarMetrics,
    /// `None` when the set holds a single class.
    pub auc_roc: Option<f64>,
    /// `None` when the set has no positives.
    pub auc_pr: Option<f64>,
    pub in_sample: bool,
}

impl EvalReport {
    pub fn compute(scores: &[f64], predictions: &[u8], labels: &[u8]) -> Result<Self, EvalError> {
        let confusion = ConfusionCounts::from_predictions(predictions, labels)?;
        if scores.len() != labels.len() {
            return Err(EvalError::LengthMismatch { scores: scores.len(), labels: labels.len() });
        }
        let auc_roc = match roc_curve(scores, labels) {
            Ok(c) => Some(c.auc),
            Err(EvalError::SingleClass(_)) => None,
            Err(e) => return Err(e),
        };
        let auc_pr = match pr_curve(scores, labels) {
            Ok(c) => Some(c.average_precision),
            Err(EvalError::NoPositives) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            rows: labels.len(),
            confusion,
            metrics: scalar_metrics(&confusion),
            auc_roc,
            auc_pr,
            in_sample: false,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<(), EvalError> {
        let file = File::create(path).map_err(|source| EvalError::Io { path: path.display().to_string(), source })?;
        serde_json::to_writer_pretty(BufWriter::new(file), self)?;
        Ok(())
    }

    /// Confusion table with precision and recall, one labelled value per line.
    pub fn summary_table(&self) -> String {
        let c = &self.confusion;
        let mut out = String::new();
        let rows = [
            ("TP", c.tp.to_string()),
            ("FP", c.fp.to_string()),
            ("TN", c.tn.to_string()),
            ("FN", c.r#fn.to_string()),
            ("Precision", format!("{}", self.metrics.precision)),
            ("Recall", format!("{}", self.metrics.recall)),
        ];
        for (name, value) in rows {
            out.push_str(&format!("{name:<10} {value}\n"));
        }
        out
    }
}

/// Writes `threshold,x,y` rows; infinite thresholds are written as `inf`.
pub fn write_curve_csv(points: &[CurvePoint], x_name: &str, y_name: &str, path: &Path) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["threshold", x_name, y_name])?;
    for p in points {
        w.write_record([p.threshold.to_string(), p.x.to_string(), p.y.to_string()])?;
    }
    w.flush().map_err(|source| EvalError::Io { path: path.display().to_string(), source })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_class_set_still_reports() {
        let r = EvalReport::compute(&[0.7, 0.9], &[1, 1], &[1, 1]).unwrap();
        assert_eq!(r.auc_roc, None);
        assert_eq!(r.auc_pr, Some(1.0));
        assert_eq!(r.metrics.precision, 1.0);
        assert!(r.summary_table().starts_with("TP         2\n"));
    }

    #[test]
    fn json_and_csv_written() {
        let dir = tempfile::tempdir().unwrap();
        let r = EvalReport::compute(&[0.9, 0.1], &[1, 0], &[1, 0]).unwrap();
        let p = dir.path().join("r.json");
        r.write_json(&p).unwrap();
        let back: EvalReport = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(back, r);
        let roc = roc_curve(&[0.9, 0.1], &[1, 0]).unwrap();
        let c = dir.path().join("roc.csv");
        write_curve_csv(&roc.points, "fpr", "tpr", &c).unwrap();
        let text = std::fs::read_to_string(&c).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("threshold,fpr,tpr\ninf,0,0"));
    }
}
