use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::table::{ColumnData, ColumnKind, ColumnSpec, DataTable};
use super::DataError;

/// Which column and which of its values define the positive class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRule {
    pub source: String,
    pub positive_values: BTreeSet<String>,
    #[serde(default = "default_output")]
    pub output: String,
}

fn default_output() -> String {
    "label".to_string()
}

impl Default for LabelRule {
    fn default() -> Self {
        Self {
            source: "IsCovered".to_string(),
            positive_values: BTreeSet::from(["Covered".to_string()]),
            output: default_output(),
        }
    }
}

impl LabelRule {
    pub fn new(source: impl Into<String>, positive_values: &[&str]) -> Self {
        Self {
            source: source.into(),
            positive_values: positive_values.iter().map(|s| s.to_string()).collect(),
            output: default_output(),
        }
    }
}

/// Appends a 0/1 label column: 1 where the source value is one of the positive values.
/// Null source cells map to 0. The source column is kept.
pub fn derive_label(table: &DataTable, rule: &LabelRule) -> Result<DataTable, DataError> {
    let spec = table.spec(&rule.source)?;
    let col = table.column(&rule.source)?;
    if !matches!(spec.kind, ColumnKind::CategoricalText | ColumnKind::Boolean) {
        return Err(DataError::Schema(format!(
            "label source {:?} must be categorical text or boolean, found {:?}",
            rule.source, spec.kind
        )));
    }
    if table.label_column().is_some() {
        return Err(DataError::Schema("table already has a label column".into()));
    }
    if table.row_count() > 0 && col.null_count() == table.row_count() {
        return Err(DataError::AllNull(rule.source.clone()));
    }
    let labels: Vec<u8> = (0..table.row_count())
        .map(|r| match col.render(r) {
            Some(v) if rule.positive_values.contains(&v) => 1,
            _ => 0,
        })
        .collect();
    debug_assert!(matches!(col, ColumnData::Text(_) | ColumnData::Boolean(_)));
    table.with_column(ColumnSpec::new(rule.output.clone(), ColumnKind::Label, false), ColumnData::Label(labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text_table(values: &[Option<&str>]) -> DataTable {
        DataTable::new(
            vec![ColumnSpec::new("IsCovered", ColumnKind::CategoricalText, true)],
            vec![ColumnData::Text(values.iter().map(|v| v.map(String::from)).collect())],
        )
        .unwrap()
    }

    fn labels(t: &DataTable) -> Vec<u8> {
        match t.column("label").unwrap() {
            ColumnData::Label(v) => v.clone(),
            other => panic!("not a label column: {other:?}"),
        }
    }

    #[test]
    fn covered_maps_to_one() {
        let t = text_table(&[Some("Covered"), Some("Not Covered"), Some("Covered")]);
        let out = derive_label(&t, &LabelRule::default()).unwrap();
        assert_eq!(labels(&out), vec![1, 0, 1]);
        assert!(out.has_column("IsCovered"));
    }

    #[test]
    fn boolean_source() {
        let t = DataTable::new(
            vec![ColumnSpec::new("flag", ColumnKind::Boolean, false)],
            vec![ColumnData::Boolean(vec![Some(true), Some(false)])],
        )
        .unwrap();
        let out = derive_label(&t, &LabelRule::new("flag", &["true"])).unwrap();
        assert_eq!(labels(&out), vec![1, 0]);
    }

    #[test]
    fn null_maps_to_zero_but_all_null_errors() {
        let t = text_table(&[Some("Covered"), None]);
        assert_eq!(labels(&derive_label(&t, &LabelRule::default()).unwrap()), vec![1, 0]);
        let t = text_table(&[None, None]);
        assert!(matches!(derive_label(&t, &LabelRule::default()), Err(DataError::AllNull(_))));
    }

    #[test]
    fn unknown_column_errors() {
        let t = text_table(&[Some("Covered")]);
        assert!(matches!(
            derive_label(&t, &LabelRule::new("nope", &["x"])),
            Err(DataError::UnknownColumn(_))
        ));
    }
}
