//! Feature-preparation stages and the fit/transform pipeline that chains them.
//!
//! A [`PipelineSpec`] is an ordered list of estimator descriptors. Fitting walks the list,
//! fitting each stage on the table produced by the stages before it, and yields a
//! [`FittedPipeline`] of immutable transformers. A classifier may only appear last; its
//! fitted form appends `prediction`, `rawScore`, `probability` and (when the label column
//! is present) `trueLabel`.

mod assembler;
mod imputer;
mod minmax;
mod string_indexer;
mod vector;
mod vector_indexer;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assembler::VectorAssembler;
pub use imputer::MeanImputeModel;
pub use minmax::MinMaxModel;
pub use string_indexer::{StringIndexModel, MISSING_TOKEN};
pub use vector::FeatureVector;
pub use vector_indexer::{VectorIndexModel, DEFAULT_MAX_CATEGORIES};

use crate::classifiers::{ClassifierError, ClassifierParams, Dataset, TrainedClassifier};
use crate::data::{ColumnData, ColumnKind, ColumnSpec, DataError, DataTable};

pub const PREDICTION_COL: &str = "prediction";
pub const RAW_SCORE_COL: &str = "rawScore";
pub const PROBABILITY_COL: &str = "probability";
pub const TRUE_LABEL_COL: &str = "trueLabel";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("stage {index}: {source}")]
    Stage {
        index: usize,
        #[source]
        source: Box<PipelineError>,
    },
    #[error("column {column:?}: expected {expected}, found {found:?}")]
    WrongKind { column: String, expected: &'static str, found: ColumnKind },
    #[error("column {0:?} has no rows to fit on")]
    EmptyFit(String),
    #[error("column {column:?}, row {row}: unseen label {label:?}")]
    UnseenLabel { column: String, label: String, row: usize },
    #[error("column {column:?}, row {row}: dimension {dim} has unseen value {value}")]
    UnseenValue { column: String, dim: usize, value: f64, row: usize },
    #[error("column {column:?}, row {row}: null input")]
    NullInput { column: String, row: usize },
    #[error("column {column:?}: expected vectors of size {expected}, found {found}")]
    SizeMismatch { column: String, expected: usize, found: usize },
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("classifier stage must be the last stage (found at {0})")]
    MisplacedClassifier(usize),
}

fn at_stage(index: usize) -> impl Fn(PipelineError) -> PipelineError {
    move |e| PipelineError::Stage { index, source: Box::new(e) }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HandleInvalid {
    #[default]
    Keep,
    Skip,
    Error,
}

/// Returns the vectors of a vector column and their common size (0 for an empty column).
pub(crate) fn vector_column<'a>(table: &'a DataTable, name: &str) -> Result<(&'a [FeatureVector], usize), PipelineError> {
    match table.column(name)? {
        ColumnData::Vector(v) => {
            let size = v.first().map_or(0, FeatureVector::size);
            if let Some(bad) = v.iter().find(|x| x.size() != size) {
                return Err(PipelineError::SizeMismatch { column: name.to_string(), expected: size, found: bad.size() });
            }
            Ok((v, size))
        }
        other => Err(PipelineError::WrongKind { column: name.to_string(), expected: "vector", found: other.kind() }),
    }
}

fn default_max_categories() -> usize {
    DEFAULT_MAX_CATEGORIES
}
fn default_hi() -> f64 {
    1.0
}
fn default_features() -> String {
    "features".into()
}
fn default_label() -> String {
    "label".into()
}

/// One estimator (or plain transformer) in a pipeline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StageSpec {
    MeanImputer {
        input_cols: Vec<String>,
    },
    StringIndexer {
        input_col: String,
        output_col: String,
        #[serde(default)]
        handle_invalid: HandleInvalid,
    },
    VectorAssembler {
        input_cols: Vec<String>,
        output_col: String,
    },
    VectorIndexer {
        input_col: String,
        output_col: String,
        #[serde(default = "default_max_categories")]
        max_categories: usize,
        #[serde(default)]
        handle_invalid: HandleInvalid,
    },
    MinMaxScaler {
        input_col: String,
        output_col: String,
        #[serde(default)]
        min: f64,
        #[serde(default = "default_hi")]
        max: f64,
    },
    Classifier {
        params: ClassifierParams,
        #[serde(default = "default_features")]
        features_col: String,
        #[serde(default = "default_label")]
        label_col: String,
    },
}

impl StageSpec {
    pub fn fit(&self, table: &DataTable) -> Result<FittedStage, PipelineError> {
        Ok(match self {
            StageSpec::MeanImputer { input_cols } => FittedStage::MeanImputer(MeanImputeModel::fit(table, input_cols)?),
            StageSpec::StringIndexer { input_col, output_col, handle_invalid } => {
                FittedStage::StringIndexer(StringIndexModel::fit(table, input_col, output_col, *handle_invalid)?)
            }
            StageSpec::VectorAssembler { input_cols, output_col } => FittedStage::VectorAssembler(VectorAssembler {
                input_cols: input_cols.clone(),
                output_col: output_col.clone(),
            }),
            StageSpec::VectorIndexer { input_col, output_col, max_categories, handle_invalid } => {
                FittedStage::VectorIndexer(VectorIndexModel::fit(table, input_col, output_col, *max_categories, *handle_invalid)?)
            }
            StageSpec::MinMaxScaler { input_col, output_col, min, max } => {
                FittedStage::MinMaxScaler(MinMaxModel::fit(table, input_col, output_col, *min, *max)?)
            }
            StageSpec::Classifier { params, features_col, label_col } => {
                let data = Dataset::from_table(table, features_col, label_col)?;
                let model = params.train(&data)?;
                FittedStage::Classifier(ClassifierStage {
                    model,
                    features_col: features_col.clone(),
                    label_col: label_col.clone(),
                })
            }
        })
    }
}

/// Fitted classifier plus the columns it reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierStage {
    pub model: TrainedClassifier,
    pub features_col: String,
    pub label_col: String,
}

impl ClassifierStage {
    pub fn transform(&self, table: &DataTable) -> Result<DataTable, PipelineError> {
        let (rows, _) = vector_column(table, &self.features_col)?;
        let mut prediction = Vec::with_capacity(rows.len());
        let mut raw = Vec::with_capacity(rows.len());
        let mut probability = Vec::with_capacity(rows.len());
        for v in rows {
            let p = self.model.predict(v)?;
            prediction.push(Some(f64::from(p.prediction)));
            raw.push(Some(p.raw_score));
            probability.push(p.probability);
        }
        let mut out = table
            .with_column(ColumnSpec::new(PREDICTION_COL, ColumnKind::Numeric, false), ColumnData::Numeric(prediction))?
            .with_column(ColumnSpec::new(RAW_SCORE_COL, ColumnKind::Numeric, false), ColumnData::Numeric(raw))?
            .with_column(ColumnSpec::new(PROBABILITY_COL, ColumnKind::Numeric, true), ColumnData::Numeric(probability))?;
        if let Ok(ColumnData::Label(labels)) = table.column(&self.label_col) {
            // a table carries at most one label-kind column, so the copy is stored as numeric 0/1
            let copy = labels.iter().map(|&l| Some(f64::from(l))).collect();
            out = out.with_column(ColumnSpec::new(TRUE_LABEL_COL, ColumnKind::Numeric, false), ColumnData::Numeric(copy))?;
        }
        Ok(out)
    }
}

/// An immutable fitted stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FittedStage {
    MeanImputer(MeanImputeModel),
    StringIndexer(StringIndexModel),
    VectorAssembler(VectorAssembler),
    VectorIndexer(VectorIndexModel),
    MinMaxScaler(MinMaxModel),
    Classifier(ClassifierStage),
}

impl FittedStage {
    pub fn transform(&self, table: &DataTable) -> Result<DataTable, PipelineError> {
        match self {
            FittedStage::MeanImputer(m) => m.transform(table),
            FittedStage::StringIndexer(m) => m.transform(table),
            FittedStage::VectorAssembler(m) => m.transform(table),
            FittedStage::VectorIndexer(m) => m.transform(table),
            FittedStage::MinMaxScaler(m) => m.transform(table),
            FittedStage::Classifier(m) => m.transform(table),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub stages: Vec<StageSpec>,
}

/// Categorical plan attributes indexed by the default pipeline, paired with their index columns.
pub const DEFAULT_CATEGORICAL: [(&str, &str); 6] = [
    ("StateCode", "SC"),
    ("SourceName", "SN"),
    ("IssuerId", "II"),
    ("QuantLimitOnSvc", "QL"),
    ("Exclusions", "EX"),
    ("IsEHB", "EHB"),
];

impl PipelineSpec {
    pub fn new(stages: Vec<StageSpec>) -> Self {
        Self { stages }
    }

    /// Default benefit-plan feature pipeline: impute `BusinessYear`, index six categorical
    /// columns (unseen labels kept), assemble them with `BusinessYear` into `catFeatures`,
    /// vector-index (unseen values skipped), min-max scale, and wrap into `features`.
    pub fn benefits_default() -> Self {
        let mut stages = vec![StageSpec::MeanImputer { input_cols: vec!["BusinessYear".into()] }];
        for (input, output) in DEFAULT_CATEGORICAL {
            stages.push(StageSpec::StringIndexer {
                input_col: input.into(),
                output_col: output.into(),
                handle_invalid: HandleInvalid::Keep,
            });
        }
        let mut cat_inputs: Vec<String> = ["SC", "SN", "II"].iter().map(|s| s.to_string()).collect();
        cat_inputs.push("BusinessYear".into());
        cat_inputs.extend(["QL", "EX", "EHB"].iter().map(|s| s.to_string()));
        stages.push(StageSpec::VectorAssembler { input_cols: cat_inputs, output_col: "catFeatures".into() });
        stages.push(StageSpec::VectorIndexer {
            input_col: "catFeatures".into(),
            output_col: "IdxCatFeatures".into(),
            max_categories: DEFAULT_MAX_CATEGORIES,
            handle_invalid: HandleInvalid::Skip,
        });
        stages.push(StageSpec::MinMaxScaler {
            input_col: "IdxCatFeatures".into(),
            output_col: "normFeatures".into(),
            min: 0.0,
            max: 1.0,
        });
        stages.push(StageSpec::VectorAssembler { input_cols: vec!["normFeatures".into()], output_col: "features".into() });
        Self { stages }
    }

    /// Index each text column (unseen labels kept) and assemble the indices into `features`.
    pub fn indexed_categorical(columns: &[&str]) -> Self {
        let mut stages = Vec::with_capacity(columns.len() + 1);
        let mut indexed = Vec::with_capacity(columns.len());
        for c in columns {
            let out = format!("{c}_idx");
            stages.push(StageSpec::StringIndexer {
                input_col: c.to_string(),
                output_col: out.clone(),
                handle_invalid: HandleInvalid::Keep,
            });
            indexed.push(out);
        }
        stages.push(StageSpec::VectorAssembler { input_cols: indexed, output_col: default_features() });
        Self { stages }
    }

    /// Copy whose terminal classifier uses `params`; a classifier stage is appended if absent.
    pub fn with_classifier(&self, params: ClassifierParams) -> Self {
        let mut stages = self.stages.clone();
        match stages.last_mut() {
            Some(StageSpec::Classifier { params: p, .. }) => *p = params,
            _ => stages.push(StageSpec::Classifier { params, features_col: default_features(), label_col: default_label() }),
        }
        Self { stages }
    }

    pub fn classifier(&self) -> Option<&ClassifierParams> {
        match self.stages.last() {
            Some(StageSpec::Classifier { params, .. }) => Some(params),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        for (i, s) in self.stages.iter().enumerate() {
            if matches!(s, StageSpec::Classifier { .. }) && i + 1 != self.stages.len() {
                return Err(PipelineError::MisplacedClassifier(i));
            }
        }
        Ok(())
    }

    pub fn fit(&self, table: &DataTable) -> Result<FittedPipeline, PipelineError> {
        self.validate()?;
        let mut current = table.clone();
        let mut fitted = Vec::with_capacity(self.stages.len());
        for (index, stage) in self.stages.iter().enumerate() {
            let model = stage.fit(&current).map_err(at_stage(index))?;
            if index + 1 < self.stages.len() {
                current = model.transform(&current).map_err(at_stage(index))?;
            }
            fitted.push(model);
        }
        Ok(FittedPipeline { stages: fitted })
    }
}

pub fn pipeline_fit(spec: &PipelineSpec, table: &DataTable) -> Result<FittedPipeline, PipelineError> {
    spec.fit(table)
}

pub fn pipeline_transform(fitted: &FittedPipeline, table: &DataTable) -> Result<DataTable, PipelineError> {
    fitted.transform(table)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub stages: Vec<FittedStage>,
}

impl FittedPipeline {
    pub fn transform(&self, table: &DataTable) -> Result<DataTable, PipelineError> {
        let mut current = table.clone();
        for (index, stage) in self.stages.iter().enumerate() {
            current = stage.transform(&current).map_err(at_stage(index))?;
        }
        Ok(current)
    }

    pub fn classifier(&self) -> Option<&ClassifierStage> {
        match self.stages.last() {
            Some(FittedStage::Classifier(c)) => Some(c),
            _ => None,
        }
    }

    /// Source-column name for each slot of `column`, traced back through indexers,
    /// assemblers and scalers. Columns not produced by the pipeline name themselves.
    pub fn feature_names(&self, column: &str) -> Vec<String> {
        let mut lineage: HashMap<String, Vec<String>> = HashMap::new();
        let resolve = |lineage: &HashMap<String, Vec<String>>, name: &str| {
            lineage.get(name).cloned().unwrap_or_else(|| vec![name.to_string()])
        };
        for stage in &self.stages {
            match stage {
                FittedStage::StringIndexer(m) => {
                    let names = resolve(&lineage, &m.input_col);
                    lineage.insert(m.output_col.clone(), names);
                }
                FittedStage::VectorAssembler(m) => {
                    let names = m.input_cols.iter().flat_map(|c| resolve(&lineage, c)).collect();
                    lineage.insert(m.output_col.clone(), names);
                }
                FittedStage::VectorIndexer(m) => {
                    let names = resolve(&lineage, &m.input_col);
                    lineage.insert(m.output_col.clone(), names);
                }
                FittedStage::MinMaxScaler(m) => {
                    let names = resolve(&lineage, &m.input_col);
                    lineage.insert(m.output_col.clone(), names);
                }
                FittedStage::MeanImputer(_) | FittedStage::Classifier(_) => {}
            }
        }
        resolve(&lineage, column)
    }
}
