use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::table::{validate_schema, ColumnData, ColumnKind, ColumnSpec, DataTable};
use super::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub quote: u8,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { delimiter: b',', quote: b'"', has_header: true }
    }
}

pub fn read_csv(path: &Path, schema: &[ColumnSpec], options: &CsvOptions) -> Result<DataTable, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    read_csv_from(file, schema, options)
}

enum Builder {
    Text(Vec<Option<String>>),
    Numeric(Vec<Option<f64>>),
    Boolean(Vec<Option<bool>>),
    Label(Vec<u8>),
}

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "true" | "t" | "yes" | "y" | "1" => Some(true),
        "false" | "f" | "no" | "n" | "0" => Some(false),
        _ => None,
    }
}

fn parse_label(raw: &str) -> Option<u8> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "1.0" | "true" => Some(1),
        "0" | "0.0" | "false" => Some(0),
        _ => None,
    }
}

/// Parses CSV text against `schema`. With a header, schema columns are located by name
/// and extra CSV columns are ignored; without one, columns are positional.
pub fn read_csv_from<R: Read>(reader: R, schema: &[ColumnSpec], options: &CsvOptions) -> Result<DataTable, DataError> {
    validate_schema(schema)?;
    if let Some(spec) = schema.iter().find(|s| s.kind == ColumnKind::Vector) {
        return Err(DataError::Schema(format!("column {:?}: vector columns cannot be read from CSV", spec.name)));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .quote(options.quote)
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let (width, positions) = if options.has_header {
        let header = match records.next() {
            Some(rec) => rec?,
            None => return Err(DataError::Parse { row: 0, message: "missing header row".into() }),
        };
        let names: Vec<&str> = header.iter().map(str::trim).collect();
        let mut positions = Vec::with_capacity(schema.len());
        for spec in schema {
            let pos = names
                .iter()
                .position(|n| *n == spec.name)
                .ok_or_else(|| DataError::UnknownColumn(spec.name.clone()))?;
            positions.push(pos);
        }
        (names.len(), positions)
    } else {
        (schema.len(), (0..schema.len()).collect())
    };

    let mut builders: Vec<Builder> = schema
        .iter()
        .map(|s| match s.kind {
            ColumnKind::CategoricalText => Builder::Text(Vec::new()),
            ColumnKind::Numeric => Builder::Numeric(Vec::new()),
            ColumnKind::Boolean => Builder::Boolean(Vec::new()),
            ColumnKind::Label => Builder::Label(Vec::new()),
            ColumnKind::Vector => unreachable!("rejected above"),
        })
        .collect();

    for (row_idx, rec) in records.enumerate() {
        let row = row_idx + 1;
        let rec = rec?;
        if rec.len() != width {
            return Err(DataError::Parse {
                row,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        for ((spec, builder), &pos) in schema.iter().zip(builders.iter_mut()).zip(&positions) {
            let raw = &rec[pos];
            let empty = raw.trim().is_empty();
            let null_err = || DataError::Parse { row, message: format!("null in non-nullable column {:?}", spec.name) };
            match builder {
                Builder::Text(v) => {
                    if empty && !spec.nullable {
                        return Err(null_err());
                    }
                    v.push((!empty).then(|| raw.to_string()));
                }
                Builder::Numeric(v) => {
                    let parsed = raw.trim().parse::<f64>().ok().filter(|x| x.is_finite());
                    match parsed {
                        Some(x) => v.push(Some(x)),
                        None if spec.nullable => v.push(None),
                        None if empty => return Err(null_err()),
                        None => {
                            return Err(DataError::Parse {
                                row,
                                message: format!("column {:?}: cannot parse {raw:?} as a number", spec.name),
                            })
                        }
                    }
                }
                Builder::Boolean(v) => match parse_bool(raw) {
                    Some(b) => v.push(Some(b)),
                    None if spec.nullable => v.push(None),
                    None if empty => return Err(null_err()),
                    None => {
                        return Err(DataError::Parse {
                            row,
                            message: format!("column {:?}: cannot parse {raw:?} as a boolean", spec.name),
                        })
                    }
                },
                Builder::Label(v) => match parse_label(raw) {
                    Some(l) => v.push(l),
                    None => {
                        return Err(DataError::Parse {
                            row,
                            message: format!("column {:?}: label must be 0 or 1, found {raw:?}", spec.name),
                        })
                    }
                },
            }
        }
    }

    let columns = builders
        .into_iter()
        .map(|b| match b {
            Builder::Text(v) => ColumnData::Text(v),
            Builder::Numeric(v) => ColumnData::Numeric(v),
            Builder::Boolean(v) => ColumnData::Boolean(v),
            Builder::Label(v) => ColumnData::Label(v),
        })
        .collect();
    DataTable::new(schema.to_vec(), columns)
}

/// Writes every column; nulls become empty cells.
pub fn write_csv<W: Write>(table: &DataTable, writer: W, options: &CsvOptions) -> Result<(), DataError> {
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(options.delimiter)
        .quote(options.quote)
        .from_writer(writer);
    if options.has_header {
        wtr.write_record(table.schema().iter().map(|s| s.name.as_str()))?;
    }
    let cols: Vec<&ColumnData> = table.columns().map(|(_, c)| c).collect();
    for row in 0..table.row_count() {
        wtr.write_record(cols.iter().map(|c| c.render(row).unwrap_or_default()))?;
    }
    wtr.flush().map_err(|source| DataError::Io { path: "<csv writer>".into(), source })?;
    Ok(())
}
