use serde::{Deserialize, Serialize};

use super::{vector_column, FeatureVector, PipelineError};
use crate::data::{ColumnData, ColumnKind, ColumnSpec, DataTable};

/// Per-dimension affine rescale onto `[lo, hi]` learned from the fit table.
/// Out-of-range inputs are not clamped. Constant dimensions map to `(lo + hi) / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxModel {
    pub input_col: String,
    pub output_col: String,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

impl MinMaxModel {
    pub fn fit(table: &DataTable, input_col: &str, output_col: &str, lo: f64, hi: f64) -> Result<Self, PipelineError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(PipelineError::InvalidParam(format!("min-max range ({lo}, {hi}) requires lo < hi")));
        }
        let (rows, size) = vector_column(table, input_col)?;
        if rows.is_empty() {
            return Err(PipelineError::EmptyFit(input_col.to_string()));
        }
        let mut mins = vec![f64::INFINITY; size];
        let mut maxs = vec![f64::NEG_INFINITY; size];
        for v in rows {
            for (d, x) in v.to_dense().into_iter().enumerate() {
                mins[d] = mins[d].min(x);
                maxs[d] = maxs[d].max(x);
            }
        }
        Ok(Self { input_col: input_col.into(), output_col: output_col.into(), mins, maxs, lo, hi })
    }

    pub fn scale(&self, dim: usize, x: f64) -> f64 {
        let (min, max) = (self.mins[dim], self.maxs[dim]);
        if max == min {
            (self.hi + self.lo) / 2.0
        } else {
            (x - min) / (max - min) * (self.hi - self.lo) + self.lo
        }
    }

    pub fn transform(&self, table: &DataTable) -> Result<DataTable, PipelineError> {
        let (rows, size) = vector_column(table, &self.input_col)?;
        if !rows.is_empty() && size != self.mins.len() {
            return Err(PipelineError::SizeMismatch { column: self.input_col.clone(), expected: self.mins.len(), found: size });
        }
        let out = rows
            .iter()
            .map(|v| {
                let scaled = v.to_dense().into_iter().enumerate().map(|(d, x)| self.scale(d, x)).collect();
                FeatureVector::dense(scaled)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(table.with_column(
            ColumnSpec::new(self.output_col.clone(), ColumnKind::Vector, false),
            ColumnData::Vector(out),
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(rows: Vec<Vec<f64>>) -> DataTable {
        DataTable::new(
            vec![ColumnSpec::new("v", ColumnKind::Vector, false)],
            vec![ColumnData::Vector(rows.into_iter().map(|r| FeatureVector::dense(r).unwrap()).collect())],
        )
        .unwrap()
    }

    fn out(t: &DataTable) -> Vec<Vec<f64>> {
        match t.column("o").unwrap() {
            ColumnData::Vector(v) => v.iter().map(FeatureVector::to_dense).collect(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn rescales_ten_twenty_thirty() {
        let t = table(vec![vec![10.0], vec![20.0], vec![30.0]]);
        let m = MinMaxModel::fit(&t, "v", "o", 0.0, 1.0).unwrap();
        assert_eq!(out(&m.transform(&t).unwrap()), vec![vec![0.0], vec![0.5], vec![1.0]]);
        // (5 - 10) / (30 - 10) = -0.25, not clamped
        assert_eq!(m.scale(0, 5.0), -0.25);
    }

    #[test]
    fn constant_dimension_maps_to_midpoint() {
        let t = table(vec![vec![4.0], vec![4.0], vec![4.0]]);
        let m = MinMaxModel::fit(&t, "v", "o", 0.0, 1.0).unwrap();
        assert_eq!(out(&m.transform(&t).unwrap()), vec![vec![0.5]; 3]);
    }

    #[test]
    fn empty_fit_and_bad_range() {
        assert!(MinMaxModel::fit(&table(vec![]), "v", "o", 0.0, 1.0).is_err());
        assert!(MinMaxModel::fit(&table(vec![vec![1.0]]), "v", "o", 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn fit_rows_land_in_range(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..40),
                                  lo in -5.0f64..0.0, width in 0.1f64..10.0) {
            let hi = lo + width;
            let t = table(rows.clone());
            let m = MinMaxModel::fit(&t, "v", "o", lo, hi).unwrap();
            let o = out(&m.transform(&t).unwrap());
            for d in 0..3 {
                if m.mins[d] == m.maxs[d] { continue; }
                for (r, row) in o.iter().enumerate() {
                    prop_assert!(row[d] >= lo - 1e-9 && row[d] <= hi + 1e-9);
                    if rows[r][d] == m.mins[d] { prop_assert_eq!(row[d], lo); }
                    if rows[r][d] == m.maxs[d] { prop_assert!((row[d] - hi).abs() <= 1e-12 * hi.abs().max(1.0)); }
                }
            }
        }
    }
}
