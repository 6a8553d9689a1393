use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{HandleInvalid, PipelineError};
use crate::data::{ColumnData, ColumnKind, ColumnSpec, DataTable};

/// Token substituted for null categorical cells before indexing.
pub const MISSING_TOKEN: &str = "__MISSING__";

/// Category text to index, most frequent first; ties go to the lexicographically smaller label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StringIndexModel {
    pub input_col: String,
    pub output_col: String,
    /// `labels[i]` is the text mapped to index `i`.
    pub labels: Vec<String>,
    pub handle_invalid: HandleInvalid,
}

fn text_values(table: &DataTable, column: &str) -> Result<Vec<String>, PipelineError> {
    let spec = table.spec(column)?;
    let col = table.column(column)?;
    match spec.kind {
        ColumnKind::CategoricalText | ColumnKind::Boolean => Ok((0..table.row_count())
            .map(|r| col.render(r).unwrap_or_else(|| MISSING_TOKEN.to_string()))
            .collect()),
        other => Err(PipelineError::WrongKind { column: column.to_string(), expected: "categorical text", found: other }),
    }
}

impl StringIndexModel {
    pub fn fit(
        table: &DataTable,
        input_col: &str,
        output_col: &str,
        handle_invalid: HandleInvalid,
    ) -> Result<Self, PipelineError> {
        let values = text_values(table, input_col)?;
        if values.is_empty() {
            return Err(PipelineError::EmptyFit(input_col.to_string()));
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for v in &values {
            *counts.entry(v.as_str()).or_default() += 1;
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(Self {
            input_col: input_col.to_string(),
            output_col: output_col.to_string(),
            labels: ranked.into_iter().map(|(l, _)| l.to_string()).collect(),
            handle_invalid,
        })
    }

    pub fn mapping(&self) -> BTreeMap<&str, usize> {
        self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
    }

    pub fn transform(&self, table: &DataTable) -> Result<DataTable, PipelineError> {
        let values = text_values(table, &self.input_col)?;
        let lookup: HashMap<&str, usize> = self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let unseen = self.labels.len() as f64;
        let mut keep_rows = Vec::with_capacity(values.len());
        let mut out = Vec::with_capacity(values.len());
        for (row, v) in values.iter().enumerate() {
            match lookup.get(v.as_str()) {
                Some(&i) => {
                    keep_rows.push(row);
                    out.push(Some(i as f64));
                }
                None => match self.handle_invalid {
                    HandleInvalid::Keep => {
                        keep_rows.push(row);
                        out.push(Some(unseen));
                    }
                    HandleInvalid::Skip => {}
                    HandleInvalid::Error => {
                        return Err(PipelineError::UnseenLabel {
                            column: self.input_col.clone(),
                            label: v.clone(),
                            row,
                        })
                    }
                },
            }
        }
        let base = if keep_rows.len() == values.len() { table.clone() } else { table.take_rows(&keep_rows) };
        Ok(base.with_column(
            ColumnSpec::new(self.output_col.clone(), ColumnKind::Numeric, false),
            ColumnData::Numeric(out),
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(values: &[&str]) -> DataTable {
        DataTable::new(
            vec![ColumnSpec::new("StateCode", ColumnKind::CategoricalText, true)],
            vec![ColumnData::Text(values.iter().map(|v| Some(v.to_string())).collect())],
        )
        .unwrap()
    }

    fn indices(t: &DataTable, col: &str) -> Vec<f64> {
        match t.column(col).unwrap() {
            ColumnData::Numeric(v) => v.iter().map(|x| x.unwrap()).collect(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn frequency_then_lexicographic() {
        let m = StringIndexModel::fit(&table(&["CA", "CA", "TX", "AK"]), "StateCode", "SC", HandleInvalid::Keep).unwrap();
        assert_eq!(m.mapping(), BTreeMap::from([("CA", 0), ("AK", 1), ("TX", 2)]));
        let m = StringIndexModel::fit(&table(&["X", "X"]), "StateCode", "SC", HandleInvalid::Keep).unwrap();
        assert_eq!(m.labels, vec!["X"]);
    }

    #[test]
    fn frequency_rank_follows_histogram() {
        // histogram e:5 d:4 c:3 b:2 a:1, shuffled in the input
        let mut v = Vec::new();
        for (label, n) in [("a", 1), ("c", 3), ("e", 5), ("b", 2), ("d", 4)] {
            v.extend(std::iter::repeat_n(label, n));
        }
        v.reverse();
        let m = StringIndexModel::fit(&table(&v), "StateCode", "SC", HandleInvalid::Keep).unwrap();
        assert_eq!(m.labels, vec!["e", "d", "c", "b", "a"]);
    }

    #[test]
    fn unseen_label_policies() {
        let fit = table(&["CA", "CA", "TX", "AK"]);
        let probe = table(&["TX", "WA"]);
        let keep = StringIndexModel::fit(&fit, "StateCode", "SC", HandleInvalid::Keep).unwrap();
        assert_eq!(indices(&keep.transform(&probe).unwrap(), "SC"), vec![2.0, 3.0]);

        let skip = StringIndexModel { handle_invalid: HandleInvalid::Skip, ..keep.clone() };
        let out = skip.transform(&probe).unwrap();
        assert_eq!(out.row_count(), 1);
        assert_eq!(indices(&out, "SC"), vec![2.0]);

        let strict = StringIndexModel { handle_invalid: HandleInvalid::Error, ..keep };
        let err = strict.transform(&probe).unwrap_err();
        assert!(err.to_string().contains("WA"), "{err}");
        assert!(matches!(err, PipelineError::UnseenLabel { row: 1, .. }));
    }

    #[test]
    fn nulls_become_missing_token() {
        let t = DataTable::new(
            vec![ColumnSpec::new("c", ColumnKind::CategoricalText, true)],
            vec![ColumnData::Text(vec![None, Some("a".into()), None])],
        )
        .unwrap();
        let m = StringIndexModel::fit(&t, "c", "ci", HandleInvalid::Error).unwrap();
        assert_eq!(m.labels, vec![MISSING_TOKEN, "a"]);
        assert_eq!(indices(&m.transform(&t).unwrap(), "ci"), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn empty_and_wrong_kind() {
        assert!(matches!(
            StringIndexModel::fit(&table(&[]), "StateCode", "SC", HandleInvalid::Keep),
            Err(PipelineError::EmptyFit(_))
        ));
        let t = DataTable::new(
            vec![ColumnSpec::new("n", ColumnKind::Numeric, false)],
            vec![ColumnData::Numeric(vec![Some(1.0)])],
        )
        .unwrap();
        assert!(StringIndexModel::fit(&t, "n", "ni", HandleInvalid::Keep).is_err());
    }
}
