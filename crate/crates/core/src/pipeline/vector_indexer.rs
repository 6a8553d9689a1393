use serde::{Deserialize, Serialize};

use super::{vector_column, FeatureVector, HandleInvalid, PipelineError};
use crate::data::{ColumnData, ColumnKind, ColumnSpec, DataTable};

pub const DEFAULT_MAX_CATEGORIES: usize = 20;

/// Dimensions with at most `max_categories` distinct fit values are re-encoded as
/// contiguous indices in ascending value order; the rest pass through.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorIndexModel {
    pub input_col: String,
    pub output_col: String,
    pub max_categories: usize,
    pub num_features: usize,
    /// Sorted distinct values for categorical dimensions; `None` for continuous ones.
    pub category_maps: Vec<Option<Vec<f64>>>,
    pub handle_invalid: HandleInvalid,
}

impl VectorIndexModel {
    pub fn fit(
        table: &DataTable,
        input_col: &str,
        output_col: &str,
        max_categories: usize,
        handle_invalid: HandleInvalid,
    ) -> Result<Self, PipelineError> {
        if max_categories == 0 {
            return Err(PipelineError::InvalidParam("max_categories must be positive".into()));
        }
        let (rows, num_features) = vector_column(table, input_col)?;
        if rows.is_empty() {
            return Err(PipelineError::EmptyFit(input_col.to_string()));
        }
        let mut category_maps = Vec::with_capacity(num_features);
        for dim in 0..num_features {
            let mut values: Vec<f64> = rows.iter().map(|v| v.get(dim)).collect();
            values.sort_by(f64::total_cmp);
            values.dedup_by(|a, b| a == b);
            category_maps.push((values.len() <= max_categories).then_some(values));
        }
        Ok(Self {
            input_col: input_col.to_string(),
            output_col: output_col.to_string(),
            max_categories,
            num_features,
            category_maps,
            handle_invalid,
        })
    }

    pub fn categorical_dims(&self) -> Vec<usize> {
        self.category_maps
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.as_ref().map(|_| i))
            .collect()
    }

    pub fn transform(&self, table: &DataTable) -> Result<DataTable, PipelineError> {
        let (rows, size) = vector_column(table, &self.input_col)?;
        if !rows.is_empty() && size != self.num_features {
            return Err(PipelineError::SizeMismatch { column: self.input_col.clone(), expected: self.num_features, found: size });
        }
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut out = Vec::with_capacity(rows.len());
        'rows: for (row, v) in rows.iter().enumerate() {
            let mut values = v.to_dense();
            for (dim, map) in self.category_maps.iter().enumerate() {
                let Some(map) = map else { continue };
                let x = values[dim];
                match map.binary_search_by(|probe| probe.total_cmp(&x)) {
                    Ok(i) => values[dim] = i as f64,
                    Err(_) if x == 0.0 && map.contains(&0.0) => {
                        // -0.0 vs 0.0
                        values[dim] = map.iter().position(|m| *m == 0.0).unwrap_or(0) as f64;
                    }
                    Err(_) => match self.handle_invalid {
                        HandleInvalid::Keep => values[dim] = map.len() as f64,
                        HandleInvalid::Skip => continue 'rows,
                        HandleInvalid::Error => {
                            return Err(PipelineError::UnseenValue { column: self.input_col.clone(), dim, value: x, row })
                        }
                    },
                }
            }
            keep_rows.push(row);
            out.push(FeatureVector::compressed(values)?);
        }
        let base = if keep_rows.len() == rows.len() { table.clone() } else { table.take_rows(&keep_rows) };
        Ok(base.with_column(
            ColumnSpec::new(self.output_col.clone(), ColumnKind::Vector, false),
            ColumnData::Vector(out),
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn ascending_value_map() {
        let t = table(vec![vec![5.0], vec![0.0], vec![1.0], vec![5.0]]);
        let m = VectorIndexModel::fit(&t, "v", "o", 4, HandleInvalid::Skip).unwrap();
        assert_eq!(m.category_maps[0], Some(vec![0.0, 1.0, 5.0]));
        assert_eq!(out(&m.transform(&t).unwrap()), vec![vec![2.0], vec![0.0], vec![1.0], vec![2.0]]);
    }

    #[test]
    fn high_cardinality_passes_through() {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64 * 0.5, 1.0]).collect();
        let t = table(rows.clone());
        let m = VectorIndexModel::fit(&t, "v", "o", 20, HandleInvalid::Skip).unwrap();
        assert_eq!(m.categorical_dims(), vec![1]);
        let o = out(&m.transform(&t).unwrap());
        assert!(o.iter().zip(&rows).all(|(a, b)| a[0] == b[0] && a[1] == 0.0));
    }

    #[test]
    fn unseen_value_policies() {
        let fit = table(vec![vec![0.0], vec![1.0], vec![5.0]]);
        let probe = table(vec![vec![1.0], vec![7.0]]);
        let skip = VectorIndexModel::fit(&fit, "v", "o", 4, HandleInvalid::Skip).unwrap();
        let t = skip.transform(&probe).unwrap();
        assert_eq!(t.row_count(), 1);
        assert_eq!(out(&t), vec![vec![1.0]]);
        let keep = VectorIndexModel { handle_invalid: HandleInvalid::Keep, ..skip.clone() };
        assert_eq!(out(&keep.transform(&probe).unwrap()), vec![vec![1.0], vec![3.0]]);
        let strict = VectorIndexModel { handle_invalid: HandleInvalid::Error, ..skip };
        assert!(matches!(strict.transform(&probe), Err(PipelineError::UnseenValue { row: 1, .. })));
    }

    #[test]
    fn varying_sizes_rejected() {
        let t = table(vec![vec![0.0], vec![1.0, 2.0]]);
        assert!(matches!(
            VectorIndexModel::fit(&t, "v", "o", 4, HandleInvalid::Skip),
            Err(PipelineError::SizeMismatch { .. })
        ));
    }
}
