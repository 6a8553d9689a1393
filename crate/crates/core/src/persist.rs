//! Versioned binary model files and JSON table snapshots.
//!
//! A model file is laid out as
//!
//! ```text
//! magic "TABMLMOD" | version u32 LE | tag length u8 | tag bytes
//!   | body length u64 LE | SHA-256 of body (32 bytes) | JSON body
//! ```
//!
//! The tag is the classifier family, readable without parsing the body.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classifiers::{ClassifierParams, Family, TrainedClassifier};
use crate::data::{DataTable, LabelRule};
use crate::pipeline::FittedPipeline;

pub const MAGIC: &[u8; 8] = b"TABMLMOD";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a model file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported model format version {0}; this build reads version {FORMAT_VERSION}")]
    UnsupportedVersion(u32),
    #[error("model file is truncated")]
    Truncated,
    #[error("model body checksum mismatch; the file is corrupted")]
    ChecksumMismatch,
    #[error("header says {header} but body holds {body}")]
    TagMismatch { header: String, body: String },
    #[error("model body: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PersistError + '_ {
    move |source| PersistError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub seed: u64,
    /// SHA-256 of the training table snapshot.
    pub data_fingerprint: String,
    pub training_rows: usize,
    /// Column holding the label the model was trained against.
    pub label_column: String,
    /// Rule used to derive that label from a text column, if it was derived.
    #[serde(default)]
    pub label_rule: Option<LabelRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Pipeline { pipeline: FittedPipeline },
    Classifier { model: TrainedClassifier },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub params: Option<ClassifierParams>,
    pub metadata: ModelMetadata,
    pub payload: Payload,
}

impl SavedModel {
    pub fn family(&self) -> Option<Family> {
        match &self.payload {
            Payload::Pipeline { pipeline } => pipeline.classifier().map(|c| c.model.family),
            Payload::Classifier { model } => Some(model.family),
        }
    }

    fn tag(&self) -> String {
        self.family().map_or_else(|| "none".to_string(), |f| f.tag().to_string())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, PersistError> {
        let body = serde_json::to_vec(self)?;
        let tag = self.tag();
        let mut out = Vec::with_capacity(body.len() + 64);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(tag.len() as u8);
        out.extend_from_slice(tag.as_bytes());
        out.extend_from_slice(&(body.len() as u64).to_le_bytes());
        out.extend_from_slice(&Sha256::digest(&body));
        out.extend_from_slice(&body);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PersistError> {
        let mut rest = bytes;
        let mut take = |n: usize| -> Result<&[u8], PersistError> {
            if rest.len() < n {
                return Err(PersistError::Truncated);
            }
            let (head, tail) = rest.split_at(n);
            rest = tail;
            Ok(head)
        };
        if take(MAGIC.len()).map_err(|_| PersistError::BadMagic)? != MAGIC {
            return Err(PersistError::BadMagic);
        }
        let version = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(PersistError::UnsupportedVersion(version));
        }
        let tag_len = take(1)?[0] as usize;
        let tag = String::from_utf8_lossy(take(tag_len)?).into_owned();
        let body_len = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        let checksum = take(32)?.to_vec();
        let body_len = usize::try_from(body_len).map_err(|_| PersistError::Truncated)?;
        let body = take(body_len)?;
        if Sha256::digest(body).as_slice() != checksum.as_slice() {
            return Err(PersistError::ChecksumMismatch);
        }
        let model: SavedModel = serde_json::from_slice(body)?;
        if model.tag() != tag {
            return Err(PersistError::TagMismatch { header: tag, body: model.tag() });
        }
        Ok(model)
    }
}

pub fn save_model(model: &SavedModel, path: &Path) -> Result<(), PersistError> {
    fs::write(path, model.to_bytes()?).map_err(io_err(path))
}

pub fn load_model(path: &Path) -> Result<SavedModel, PersistError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    SavedModel::from_bytes(&bytes)
}

/// Hex SHA-256 of the table's canonical JSON encoding.
pub fn table_fingerprint(table: &DataTable) -> String {
    let json = serde_json::to_vec(table).expect("tables serialize");
    hex::encode(Sha256::digest(&json))
}

pub fn save_table(table: &DataTable, path: &Path) -> Result<(), PersistError> {
    fs::write(path, serde_json::to_vec(table)?).map_err(io_err(path))
}

pub fn load_table(path: &Path) -> Result<DataTable, PersistError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let table: DataTable = serde_json::from_slice(&bytes)?;
    // re-run the constructor checks on untrusted input
    let schema = table.schema().to_vec();
    let columns = table.columns().map(|(_, c)| c.clone()).collect();
    DataTable::new(schema, columns).map_err(|e| PersistError::Json(serde::de::Error::custom(e.to_string())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::ModelBody;

    fn sample() -> SavedModel {
        SavedModel {
            params: None,
            metadata: ModelMetadata {
                seed: 7,
                data_fingerprint: "abc".into(),
                training_rows: 3,
                label_column: "label".into(),
                label_rule: None,
            },
            payload: Payload::Classifier {
                model: TrainedClassifier {
                    family: Family::Lr,
                    dim: 2,
                    threshold: 0.5,
                    body: ModelBody::Linear { weights: vec![0.1 + 0.2, -1.0 / 3.0], intercept: 1e-300 },
                },
            },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample();
        let back = SavedModel::from_bytes(&m.to_bytes().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.to_bytes().unwrap(), back.to_bytes().unwrap());
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = sample().to_bytes().unwrap();
        let mut flipped = bytes.clone();
        let last = flipped.len() - 5;
        flipped[last] ^= 0x01;
        assert!(matches!(SavedModel::from_bytes(&flipped), Err(PersistError::ChecksumMismatch)));
        assert!(matches!(SavedModel::from_bytes(&bytes[..bytes.len() - 1]), Err(PersistError::Truncated)));
        assert!(matches!(SavedModel::from_bytes(b"NOTAMODEL..."), Err(PersistError::BadMagic)));
        let mut v2 = bytes.clone();
        v2[8] = 2;
        assert!(matches!(SavedModel::from_bytes(&v2), Err(PersistError::UnsupportedVersion(2))));
        assert!(matches!(SavedModel::from_bytes(&[]), Err(PersistError::BadMagic)));
    }

    #[test]
    fn fingerprint_tracks_content() {
        use crate::data::{ColumnData, ColumnKind, ColumnSpec};
        let t = |v: f64| {
            DataTable::new(vec![ColumnSpec::new("a", ColumnKind::Numeric, false)], vec![ColumnData::Numeric(vec![Some(v)])])
                .unwrap()
        };
        assert_eq!(table_fingerprint(&t(1.0)), table_fingerprint(&t(1.0)));
        assert_ne!(table_fingerprint(&t(1.0)), table_fingerprint(&t(2.0)));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        save_table(&t(3.5), &p).unwrap();
        assert_eq!(load_table(&p).unwrap(), t(3.5));
    }
}
