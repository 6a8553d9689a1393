//! Tabular binary classification: CSV ingestion, feature pipelines, six classifier
//! families, evaluation metrics, grid-search cross-validation and model persistence.

pub mod classifiers;
pub mod data;
pub mod evaluation;
pub mod model_selection;
pub mod persist;
pub mod pipeline;
