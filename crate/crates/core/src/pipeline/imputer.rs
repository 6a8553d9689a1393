use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::data::{ColumnData, DataTable};

/// Replaces nulls in numeric columns with the mean observed at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanImputeModel {
    pub means: Vec<(String, f64)>,
}

impl MeanImputeModel {
    pub fn fit(table: &DataTable, input_cols: &[String]) -> Result<Self, PipelineError> {
        let mut means = Vec::with_capacity(input_cols.len());
        for name in input_cols {
            let ColumnData::Numeric(values) = table.column(name)? else {
                let found = table.spec(name)?.kind;
                return Err(PipelineError::WrongKind { column: name.clone(), expected: "numeric", found });
            };
            let present: Vec<f64> = values.iter().flatten().copied().collect();
            if present.is_empty() {
                return Err(PipelineError::EmptyFit(name.clone()));
            }
            means.push((name.clone(), present.iter().sum::<f64>() / present.len() as f64));
        }
        Ok(Self { means })
    }

    pub fn transform(&self, table: &DataTable) -> Result<DataTable, PipelineError> {
        let mut out = table.clone();
        for (name, mean) in &self.means {
            let ColumnData::Numeric(values) = table.column(name)? else {
                let found = table.spec(name)?.kind;
                return Err(PipelineError::WrongKind { column: name.clone(), expected: "numeric", found });
            };
            if values.iter().all(Option::is_some) {
                continue;
            }
            let filled = values.iter().map(|v| Some(v.unwrap_or(*mean))).collect();
            out = out.replace_column(name, ColumnData::Numeric(filled))?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ColumnKind, ColumnSpec};

    #[test]
    fn fills_with_fit_mean() {
        let fit = DataTable::new(
            vec![ColumnSpec::new("y", ColumnKind::Numeric, true)],
            vec![ColumnData::Numeric(vec![Some(2017.0), None, Some(2019.0)])],
        )
        .unwrap();
        let m = MeanImputeModel::fit(&fit, &["y".to_string()]).unwrap();
        assert_eq!(m.means, vec![("y".to_string(), 2018.0)]);
        let probe = DataTable::new(
            vec![ColumnSpec::new("y", ColumnKind::Numeric, true)],
            vec![ColumnData::Numeric(vec![None, Some(1.0)])],
        )
        .unwrap();
        assert_eq!(
            m.transform(&probe).unwrap().column("y").unwrap(),
            &ColumnData::Numeric(vec![Some(2018.0), Some(1.0)])
        );
    }
}
