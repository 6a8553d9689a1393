//! Columnar tables, CSV ingestion, label derivation, sampling and synthetic data.

mod csv_io;
mod label;
mod sampling;
mod synth;
mod table;

pub use csv_io::{read_csv, read_csv_from, write_csv, CsvOptions};
pub use label::{derive_label, LabelRule};
pub use sampling::{exact_count, sample_rows, shuffled_indices, train_test_split};
pub use synth::{generate_synthetic, SynthFeature, SynthSpec};
pub use table::{validate_schema, ColumnData, ColumnKind, ColumnSpec, DataTable};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("column {0:?} contains only nulls")]
    AllNull(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error("{0}")]
    InvalidArgument(String),
}
