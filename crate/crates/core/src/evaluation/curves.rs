use serde::{Deserialize, Serialize};

use super::{check_inputs, EvalError};

/// One operating point. For ROC `x` is the false-positive rate and `y` the true-positive
/// rate; for precision-recall `x` is recall and `y` precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<CurvePoint>,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<CurvePoint>,
    /// `sum_k (R_k - R_{k-1}) * P_k` over distinct thresholds.
    pub average_precision: f64,
}

/// Cumulative `(threshold, tp, fp)` after admitting each group of tied scores, highest first.
fn cumulative(scores: &[f64], labels: &[u8]) -> Vec<(f64, u64, u64)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        out.push((s, tp, fp));
    }
    out
}

/// ROC curve from `(0, 0)` to `(1, 1)`; tied scores form a single step, so the trapezoid
/// area equals the probability that a random positive outscores a random negative, ties
/// counting one half.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<RocCurve, EvalError> {
    check_inputs(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 {
        return Err(EvalError::SingleClass(0));
    }
    if neg == 0.0 {
        return Err(EvalError::SingleClass(1));
    }
    let mut points = vec![CurvePoint { threshold: f64::INFINITY, x: 0.0, y: 0.0 }];
    let mut auc = 0.0;
    for (threshold, tp, fp) in cumulative(scores, labels) {
        let x = fp as f64 / neg;
        let y = tp as f64 / pos;
        let prev = points[points.len() - 1];
        auc += (x - prev.x) * (y + prev.y) / 2.0;
        points.push(CurvePoint { threshold, x, y });
    }
    Ok(RocCurve { points, auc })
}

pub fn pr_curve(scores: &[f64], labels: &[u8]) -> Result<PrCurve, EvalError> {
    check_inputs(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    if pos == 0.0 {
        return Err(EvalError::NoPositives);
    }
    let mut points = Vec::new();
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (threshold, tp, fp) in cumulative(scores, labels) {
        let recall = tp as f64 / pos;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push(CurvePoint { threshold, x: recall, y: precision });
    }
    Ok(PrCurve { points, average_precision: ap })
}
