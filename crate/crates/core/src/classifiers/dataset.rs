use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::data::{ColumnData, DataTable};
use crate::pipeline::FeatureVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub features: FeatureVector,
    pub label: u8,
}

/// Dense row-major training matrix with 0/1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    x: Vec<f64>,
    y: Vec<u8>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self, ClassifierError> {
        if rows.len() != labels.len() {
            return Err(ClassifierError::InvalidData(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut x = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(ClassifierError::DimensionMismatch { expected: dim, found: r.len() });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(ClassifierError::NonFinite { row: i });
            }
            x.extend_from_slice(r);
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(ClassifierError::InvalidData(format!("label {bad} is not 0 or 1")));
        }
        Ok(Self { dim, x, y: labels })
    }

    pub fn from_rows(rows: &[LabeledRow]) -> Result<Self, ClassifierError> {
        Self::new(
            rows.iter().map(|r| r.features.to_dense()).collect(),
            rows.iter().map(|r| r.label).collect(),
        )
    }

    /// Reads a vector feature column and a label column (label-kind or numeric 0/1).
    pub fn from_table(table: &DataTable, features_col: &str, label_col: &str) -> Result<Self, ClassifierError> {
        let features = match table.column(features_col).map_err(|e| ClassifierError::InvalidData(e.to_string()))? {
            ColumnData::Vector(v) => v.iter().map(FeatureVector::to_dense).collect(),
            other => {
                return Err(ClassifierError::InvalidData(format!(
                    "features column {features_col:?} is {:?}, not a vector",
                    other.kind()
                )))
            }
        };
        let labels = match table.column(label_col).map_err(|e| ClassifierError::InvalidData(e.to_string()))? {
            ColumnData::Label(v) => v.clone(),
            ColumnData::Numeric(v) => v
                .iter()
                .map(|x| match x {
                    Some(x) if *x == 0.0 => Ok(0),
                    Some(x) if *x == 1.0 => Ok(1),
                    other => Err(ClassifierError::InvalidData(format!("label value {other:?} is not 0 or 1"))),
                })
                .collect::<Result<_, _>>()?,
            other => {
                return Err(ClassifierError::InvalidData(format!(
                    "label column {label_col:?} is {:?}",
                    other.kind()
                )))
            }
        };
        Self::new(features, labels)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.y[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.y
    }

    pub fn value(&self, i: usize, feature: usize) -> f64 {
        self.x[i * self.dim + feature]
    }

    pub fn positives(&self) -> usize {
        self.y.iter().filter(|&&l| l == 1).count()
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        let mut x = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            x.extend_from_slice(self.row(r));
        }
        Self { dim: self.dim, x, y: rows.iter().map(|&r| self.y[r]).collect() }
    }

    /// Copy with every feature divided by its sample standard deviation; zero-variance
    /// features become 0. Returns the scales used (0 marks a dropped feature).
    pub(crate) fn standardized(&self) -> (Self, Vec<f64>) {
        let n = self.len() as f64;
        let mut scales = vec![0.0; self.dim];
        for (f, scale) in scales.iter_mut().enumerate() {
            let mean = (0..self.len()).map(|i| self.value(i, f)).sum::<f64>() / n;
            let ss = (0..self.len()).map(|i| (self.value(i, f) - mean).powi(2)).sum::<f64>();
            let std = if self.len() > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 };
            *scale = if std > 0.0 { std } else { 0.0 };
        }
        let x = self
            .x
            .chunks(self.dim.max(1))
            .flat_map(|row| row.iter().zip(&scales).map(|(v, s)| if *s > 0.0 { v / s } else { 0.0 }))
            .collect();
        (Self { dim: self.dim, x, y: self.y.clone() }, scales)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_nonfinite_and_bad_labels() {
        assert!(matches!(
            Dataset::new(vec![vec![1.0], vec![1.0, 2.0]], vec![0, 1]),
            Err(ClassifierError::DimensionMismatch { .. })
        ));
        assert!(matches!(Dataset::new(vec![vec![f64::INFINITY]], vec![0]), Err(ClassifierError::NonFinite { row: 0 })));
        assert!(Dataset::new(vec![vec![1.0]], vec![2]).is_err());
    }

    #[test]
    fn standardization_scales_by_sample_std() {
        let d = Dataset::new(vec![vec![1.0, 5.0], vec![3.0, 5.0]], vec![0, 1]).unwrap();
        let (s, scales) = d.standardized();
        assert!((scales[0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(scales[1], 0.0);
        assert_eq!(s.row(1)[1], 0.0);
        assert!((s.row(1)[0] - 3.0 / 2f64.sqrt()).abs() < 1e-15);
    }
}
