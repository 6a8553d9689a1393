use serde::{Deserialize, Serialize};

use super::{FeatureVector, PipelineError};
use crate::data::{ColumnData, ColumnKind, ColumnSpec, DataTable};

/// Concatenates numeric scalars and vectors, in declared column order, into one vector column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorAssembler {
    pub input_cols: Vec<String>,
    pub output_col: String,
}

impl VectorAssembler {
    pub fn new(input_cols: &[&str], output_col: &str) -> Self {
        Self {
            input_cols: input_cols.iter().map(|s| s.to_string()).collect(),
            output_col: output_col.to_string(),
        }
    }

    pub fn transform(&self, table: &DataTable) -> Result<DataTable, PipelineError> {
        let cols = self
            .input_cols
            .iter()
            .map(|c| Ok((c.as_str(), table.column(c)?)))
            .collect::<Result<Vec<_>, PipelineError>>()?;
        let mut out = Vec::with_capacity(table.row_count());
        for row in 0..table.row_count() {
            let mut values = Vec::new();
            for (name, col) in &cols {
                let null = || PipelineError::NullInput { column: name.to_string(), row };
                match col {
                    ColumnData::Numeric(v) => values.push(v[row].ok_or_else(null)?),
                    ColumnData::Boolean(v) => values.push(if v[row].ok_or_else(null)? { 1.0 } else { 0.0 }),
                    ColumnData::Vector(v) => values.extend(v[row].to_dense()),
                    other => {
                        return Err(PipelineError::WrongKind {
                            column: name.to_string(),
                            expected: "numeric or vector",
                            found: other.kind(),
                        })
                    }
                }
            }
            out.push(FeatureVector::compressed(values)?);
        }
        Ok(table.with_column(
            ColumnSpec::new(self.output_col.clone(), ColumnKind::Vector, false),
            ColumnData::Vector(out),
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vectors(t: &DataTable, col: &str) -> Vec<Vec<f64>> {
        match t.column(col).unwrap() {
            ColumnData::Vector(v) => v.iter().map(FeatureVector::to_dense).collect(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn concatenates_in_order() {
        let t = DataTable::new(
            vec![
                ColumnSpec::new("a", ColumnKind::Numeric, false),
                ColumnSpec::new("v", ColumnKind::Vector, false),
                ColumnSpec::new("b", ColumnKind::Numeric, false),
            ],
            vec![
                ColumnData::Numeric(vec![Some(1.0)]),
                ColumnData::Vector(vec![FeatureVector::dense(vec![2.0, 3.0]).unwrap()]),
                ColumnData::Numeric(vec![Some(4.0)]),
            ],
        )
        .unwrap();
        let out = VectorAssembler::new(&["a", "v", "b"], "f").transform(&t).unwrap();
        assert_eq!(vectors(&out, "f"), vec![vec![1.0, 2.0, 3.0, 4.0]]);
        let single = VectorAssembler::new(&["a"], "f").transform(&t).unwrap();
        assert_eq!(vectors(&single, "f"), vec![vec![1.0]]);
    }

    #[test]
    fn seven_scalars_give_size_seven() {
        let names: Vec<String> = (0..7).map(|i| format!("c{i}")).collect();
        let t = DataTable::new(
            names.iter().map(|n| ColumnSpec::new(n.clone(), ColumnKind::Numeric, false)).collect(),
            (0..7).map(|i| ColumnData::Numeric(vec![Some(if i % 2 == 0 { 1.0 } else { 0.0 })])).collect(),
        )
        .unwrap();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let out = VectorAssembler::new(&refs, "features").transform(&t).unwrap();
        match out.column("features").unwrap() {
            ColumnData::Vector(v) => assert_eq!(v[0].size(), 7),
            _ => unreachable!(),
        }
    }

    #[test]
    fn null_and_unknown_inputs_error() {
        let t = DataTable::new(
            vec![ColumnSpec::new("a", ColumnKind::Numeric, true)],
            vec![ColumnData::Numeric(vec![Some(1.0), None])],
        )
        .unwrap();
        let err = VectorAssembler::new(&["a"], "f").transform(&t).unwrap_err();
        assert!(matches!(err, PipelineError::NullInput { row: 1, .. }));
        assert!(VectorAssembler::new(&["zz"], "f").transform(&t).is_err());
    }
}
