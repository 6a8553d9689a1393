use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::DataError;
use crate::pipeline::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    CategoricalText,
    Numeric,
    Boolean,
    Label,
    /// Produced by pipeline stages; never read from CSV.
    Vector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default)]
    pub nullable: bool,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: ColumnKind, nullable: bool) -> Self {
        Self { name: name.into(), kind, nullable }
    }
}

/// Column names must be unique and at most one column may be a label.
pub fn validate_schema(schema: &[ColumnSpec]) -> Result<(), DataError> {
    let mut seen = HashSet::new();
    for spec in schema {
        if !seen.insert(spec.name.as_str()) {
            return Err(DataError::Schema(format!("duplicate column name {:?}", spec.name)));
        }
    }
    let labels = schema.iter().filter(|s| s.kind == ColumnKind::Label).count();
    if labels > 1 {
        return Err(DataError::Schema(format!("{labels} label columns declared, at most one allowed")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum ColumnData {
    Text(Vec<Option<String>>),
    Numeric(Vec<Option<f64>>),
    Boolean(Vec<Option<bool>>),
    Label(Vec<u8>),
    Vector(Vec<FeatureVector>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Text(v) => v.len(),
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Boolean(v) => v.len(),
            ColumnData::Label(v) => v.len(),
            ColumnData::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Text(_) => ColumnKind::CategoricalText,
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Boolean(_) => ColumnKind::Boolean,
            ColumnData::Label(_) => ColumnKind::Label,
            ColumnData::Vector(_) => ColumnKind::Vector,
        }
    }

    pub fn null_count(&self) -> usize {
        match self {
            ColumnData::Text(v) => v.iter().filter(|x| x.is_none()).count(),
            ColumnData::Numeric(v) => v.iter().filter(|x| x.is_none()).count(),
            ColumnData::Boolean(v) => v.iter().filter(|x| x.is_none()).count(),
            ColumnData::Label(_) | ColumnData::Vector(_) => 0,
        }
    }

    pub fn is_null(&self, row: usize) -> bool {
        match self {
            ColumnData::Text(v) => v[row].is_none(),
            ColumnData::Numeric(v) => v[row].is_none(),
            ColumnData::Boolean(v) => v[row].is_none(),
            ColumnData::Label(_) | ColumnData::Vector(_) => false,
        }
    }

    /// Text rendering of one cell, `None` for nulls. Used by CSV output and label derivation.
    pub fn render(&self, row: usize) -> Option<String> {
        match self {
            ColumnData::Text(v) => v[row].clone(),
            ColumnData::Numeric(v) => v[row].map(|x| format!("{x:?}")),
            ColumnData::Boolean(v) => v[row].map(|b| b.to_string()),
            ColumnData::Label(v) => Some(v[row].to_string()),
            ColumnData::Vector(v) => Some(v[row].to_string()),
        }
    }

    fn take(&self, rows: &[usize]) -> ColumnData {
        fn pick<T: Clone>(v: &[T], rows: &[usize]) -> Vec<T> {
            rows.iter().map(|&r| v[r].clone()).collect()
        }
        match self {
            ColumnData::Text(v) => ColumnData::Text(pick(v, rows)),
            ColumnData::Numeric(v) => ColumnData::Numeric(pick(v, rows)),
            ColumnData::Boolean(v) => ColumnData::Boolean(pick(v, rows)),
            ColumnData::Label(v) => ColumnData::Label(pick(v, rows)),
            ColumnData::Vector(v) => ColumnData::Vector(pick(v, rows)),
        }
    }
}

/// Immutable columnar table. Every transformation returns a new table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTable {
    schema: Vec<ColumnSpec>,
    columns: Vec<ColumnData>,
    row_count: usize,
}

impl DataTable {
    pub fn new(schema: Vec<ColumnSpec>, columns: Vec<ColumnData>) -> Result<Self, DataError> {
        validate_schema(&schema)?;
        if schema.len() != columns.len() {
            return Err(DataError::Schema(format!(
                "{} column specs but {} columns",
                schema.len(),
                columns.len()
            )));
        }
        let row_count = columns.first().map_or(0, ColumnData::len);
        for (spec, col) in schema.iter().zip(&columns) {
            if col.len() != row_count {
                return Err(DataError::Schema(format!(
                    "column {:?} has {} values, expected {row_count}",
                    spec.name,
                    col.len()
                )));
            }
            if col.kind() != spec.kind {
                return Err(DataError::Schema(format!(
                    "column {:?} declared {:?} but holds {:?} values",
                    spec.name,
                    spec.kind,
                    col.kind()
                )));
            }
            if !spec.nullable && col.null_count() > 0 {
                return Err(DataError::Schema(format!("non-nullable column {:?} contains nulls", spec.name)));
            }
        }
        Ok(Self { schema, columns, row_count })
    }

    pub fn empty() -> Self {
        Self { schema: Vec::new(), columns: Vec::new(), row_count: 0 }
    }

    pub fn schema(&self) -> &[ColumnSpec] {
        &self.schema
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|s| s.name == name)
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.column_index(name).is_some()
    }

    pub fn column(&self, name: &str) -> Result<&ColumnData, DataError> {
        self.column_index(name)
            .map(|i| &self.columns[i])
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))
    }

    pub fn spec(&self, name: &str) -> Result<&ColumnSpec, DataError> {
        self.column_index(name)
            .map(|i| &self.schema[i])
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))
    }

    pub fn columns(&self) -> impl Iterator<Item = (&ColumnSpec, &ColumnData)> {
        self.schema.iter().zip(&self.columns)
    }

    pub fn label_column(&self) -> Option<&str> {
        self.schema
            .iter()
            .find(|s| s.kind == ColumnKind::Label)
            .map(|s| s.name.as_str())
    }

    /// Returns a copy with `data` appended as a new column.
    pub fn with_column(&self, spec: ColumnSpec, data: ColumnData) -> Result<Self, DataError> {
        if self.has_column(&spec.name) {
            return Err(DataError::Schema(format!("column {:?} already exists", spec.name)));
        }
        let mut schema = self.schema.clone();
        let mut columns = self.columns.clone();
        schema.push(spec);
        columns.push(data);
        if self.columns.is_empty() {
            return Self::new(schema, columns);
        }
        if columns.last().map(ColumnData::len) != Some(self.row_count) {
            return Err(DataError::Schema(format!(
                "new column has {} values, table has {} rows",
                columns.last().map_or(0, ColumnData::len),
                self.row_count
            )));
        }
        Self::new(schema, columns)
    }

    /// Returns a copy with the named column's values replaced (same name, same kind).
    pub fn replace_column(&self, name: &str, data: ColumnData) -> Result<Self, DataError> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))?;
        let mut schema = self.schema.clone();
        let mut columns = self.columns.clone();
        schema[idx].nullable = data.null_count() > 0 || schema[idx].nullable;
        columns[idx] = data;
        Self::new(schema, columns)
    }

    pub fn select_columns(&self, names: &[&str]) -> Result<Self, DataError> {
        let mut schema = Vec::with_capacity(names.len());
        let mut columns = Vec::with_capacity(names.len());
        for name in names {
            let idx = self
                .column_index(name)
                .ok_or_else(|| DataError::UnknownColumn(name.to_string()))?;
            schema.push(self.schema[idx].clone());
            columns.push(self.columns[idx].clone());
        }
        Self::new(schema, columns)
    }

    /// Rows in the order given. Indices must be in range.
    pub fn take_rows(&self, rows: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            row_count: rows.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DataTable {
        DataTable::new(
            vec![
                ColumnSpec::new("a", ColumnKind::Numeric, true),
                ColumnSpec::new("b", ColumnKind::CategoricalText, false),
            ],
            vec![
                ColumnData::Numeric(vec![Some(1.0), None, Some(3.0)]),
                ColumnData::Text(vec![Some("x".into()), Some("y".into()), Some("z".into())]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn rejects_ragged_and_duplicate() {
        let err = DataTable::new(
            vec![ColumnSpec::new("a", ColumnKind::Numeric, true), ColumnSpec::new("a", ColumnKind::Numeric, true)],
            vec![ColumnData::Numeric(vec![]), ColumnData::Numeric(vec![])],
        );
        assert!(err.is_err());
        let err = DataTable::new(
            vec![ColumnSpec::new("a", ColumnKind::Numeric, true), ColumnSpec::new("b", ColumnKind::Numeric, true)],
            vec![ColumnData::Numeric(vec![Some(1.0)]), ColumnData::Numeric(vec![])],
        );
        assert!(err.is_err());
    }

    #[test]
    fn rejects_two_label_columns() {
        let err = DataTable::new(
            vec![ColumnSpec::new("a", ColumnKind::Label, false), ColumnSpec::new("b", ColumnKind::Label, false)],
            vec![ColumnData::Label(vec![1]), ColumnData::Label(vec![0])],
        );
        assert!(matches!(err, Err(DataError::Schema(_))));
    }

    #[test]
    fn non_nullable_null_is_rejected() {
        let err = DataTable::new(
            vec![ColumnSpec::new("a", ColumnKind::Numeric, false)],
            vec![ColumnData::Numeric(vec![None])],
        );
        assert!(err.is_err());
    }

    #[test]
    fn take_rows_and_with_column() {
        let t = sample();
        let sub = t.take_rows(&[2, 0]);
        assert_eq!(sub.row_count(), 2);
        assert_eq!(sub.column("b").unwrap().render(0).as_deref(), Some("z"));
        let t2 = t
            .with_column(ColumnSpec::new("c", ColumnKind::Label, false), ColumnData::Label(vec![0, 1, 1]))
            .unwrap();
        assert_eq!(t2.label_column(), Some("c"));
        assert!(t2
            .with_column(ColumnSpec::new("c", ColumnKind::Numeric, true), ColumnData::Numeric(vec![None; 3]))
            .is_err());
        assert_eq!(t.column("a").unwrap().null_count(), 1);
    }
}
