//! Grid search with k-fold cross-validation, and the multi-family benchmark built on it.
//!
//! Every (cell, fold) fit is an independent task. Tasks run on a dedicated thread pool and
//! their scores are collected back in task order, so the chosen cell does not depend on the
//! number of threads.

mod benchmark;
mod grid;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{ClassifierError, ClassifierParams, Dataset};
use crate::data::{shuffled_indices, ColumnData, DataError, DataTable};
use crate::evaluation::{pr_curve, roc_curve, timed_fit, EvalError};
use crate::pipeline::{FittedPipeline, PipelineError, PipelineSpec, PREDICTION_COL, RAW_SCORE_COL};

pub use benchmark::{benchmark, BenchmarkConfig, BenchmarkReport, BenchmarkRow};
pub use grid::ParamGrid;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("need 2 <= folds <= rows, got {folds} folds for {rows} rows")]
    BadFolds { folds: usize, rows: usize },
    #[error("grid has no cells")]
    EmptyGrid,
    #[error("every grid cell failed; first error: {0}")]
    AllCellsFailed(String),
    #[error("pipeline has no classifier stage")]
    NoClassifier,
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    AucRoc,
    AucPr,
}

impl Metric {
    pub fn score(self, scores: &[f64], labels: &[u8]) -> Result<f64, EvalError> {
        match self {
            Metric::AucRoc => Ok(roc_curve(scores, labels)?.auc),
            Metric::AucPr => Ok(pr_curve(scores, labels)?.average_precision),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "auc_roc" | "roc" => Ok(Metric::AucRoc),
            "auc_pr" | "pr" => Ok(Metric::AucPr),
            _ => Err(format!("unknown metric {s:?}; expected auc_roc or auc_pr")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub metric: Metric,
    pub seed: u64,
    /// Worker threads; `None` lets the pool pick.
    pub threads: Option<usize>,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { folds: 3, metric: Metric::AucRoc, seed: 1, threads: None }
    }
}

/// Held-out row indices per fold: a seeded shuffle cut into `k` contiguous chunks whose
/// sizes differ by at most one. Each fold is sorted.
pub fn fold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, SelectionError> {
    if k < 2 || k > n {
        return Err(SelectionError::BadFolds { folds: k, rows: n });
    }
    let order = shuffled_indices(n, seed);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = n / k + usize::from(f < n % k);
        let mut fold = order[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(folds)
}

/// Complement of `fold` in `0..n`; `fold` must be sorted.
pub fn training_indices(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - fold.len());
    let mut j = 0;
    for i in 0..n {
        if j < fold.len() && fold[j] == i {
            j += 1;
        } else {
            out.push(i);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub params: ClassifierParams,
    pub fold_scores: Vec<f64>,
    /// Mean held-out metric; `None` if any fold failed.
    pub mean: Option<f64>,
    pub error: Option<String>,
}

/// Scores for every cell plus the index of the winner (highest mean, earliest on ties).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub cells: Vec<CellResult>,
    pub best_index: usize,
}

impl CvSummary {
    pub fn best(&self) -> &CellResult {
        &self.cells[self.best_index]
    }
}

/// Runs `score(cell, train_rows, test_rows)` for every cell and fold and picks the winner.
pub fn grid_search<F>(cells: &[ClassifierParams], folds: &[Vec<usize>], n: usize, threads: Option<usize>, score: F) -> Result<CvSummary, SelectionError>
where
    F: Fn(&ClassifierParams, &[usize], &[usize]) -> Result<f64, SelectionError> + Sync,
{
    if cells.is_empty() {
        return Err(SelectionError::EmptyGrid);
    }
    let train_sets: Vec<Vec<usize>> = folds.iter().map(|f| training_indices(n, f)).collect();
    let tasks: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..folds.len()).map(move |f| (c, f))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| SelectionError::ThreadPool(e.to_string()))?;
    let results: Vec<Result<f64, String>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, f)| score(&cells[c], &train_sets[f], &folds[f]).map_err(|e| e.to_string()))
            .collect()
    });

    let mut out = Vec::with_capacity(cells.len());
    for (c, params) in cells.iter().enumerate() {
        let per_fold = &results[c * folds.len()..(c + 1) * folds.len()];
        let mut fold_scores = Vec::with_capacity(folds.len());
        let mut error = None;
        for r in per_fold {
            match r {
                Ok(s) => fold_scores.push(*s),
                Err(e) if error.is_none() => error = Some(e.clone()),
                Err(_) => {}
            }
        }
        let mean = error.is_none().then(|| fold_scores.iter().sum::<f64>() / fold_scores.len() as f64);
        out.push(CellResult { params: params.clone(), fold_scores, mean, error });
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, cell) in out.iter().enumerate() {
        if let Some(m) = cell.mean.filter(|m| !m.is_nan()) {
            if best.is_none_or(|(_, b)| m > b) {
                best = Some((i, m));
            }
        }
    }
    match best {
        Some((best_index, _)) => Ok(CvSummary { cells: out, best_index }),
        None => Err(SelectionError::AllCellsFailed(
            out.iter().find_map(|c| c.error.clone()).unwrap_or_else(|| "no finite score".into()),
        )),
    }
}

/// Cross-validates bare classifiers on an already-featurized dataset.
pub fn cross_validate_dataset(data: &Dataset, grid: &ParamGrid, config: &CvConfig) -> Result<CvSummary, SelectionError> {
    let cells = grid.cells()?;
    let folds = fold_indices(data.len(), config.folds, config.seed)?;
    grid_search(&cells, &folds, data.len(), config.threads, |params, train, test| {
        let model = params.train(&data.subset(train))?;
        let held = data.subset(test);
        let scores: Vec<f64> = model.predict_all(&held).iter().map(|p| p.raw_score).collect();
        Ok(config.metric.score(&scores, held.labels())?)
    })
}

/// Raw scores, hard predictions and labels from a table that went through a fitted pipeline.
pub fn scored_columns(table: &DataTable, label_col: &str) -> Result<(Vec<f64>, Vec<u8>, Vec<u8>), SelectionError> {
    let numeric = |name: &str| -> Result<Vec<f64>, SelectionError> {
        match table.column(name)? {
            ColumnData::Numeric(v) => Ok(v.iter().map(|x| x.unwrap_or(f64::NAN)).collect()),
            other => Err(DataError::Schema(format!("column {name:?} is {:?}, expected numeric", other.kind())).into()),
        }
    };
    let scores = numeric(RAW_SCORE_COL)?;
    let predictions = numeric(PREDICTION_COL)?.iter().map(|p| u8::from(*p > 0.5)).collect();
    let labels = match table.column(label_col)? {
        ColumnData::Label(v) => v.clone(),
        ColumnData::Numeric(v) => v.iter().map(|x| u8::from(x.unwrap_or(0.0) > 0.5)).collect(),
        other => return Err(DataError::Schema(format!("label column {label_col:?} is {:?}", other.kind())).into()),
    };
    Ok((scores, predictions, labels))
}

/// Outcome of cross-validating a pipeline and refitting the winner on all rows.
#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub summary: CvSummary,
    pub model: FittedPipeline,
    /// Wall-clock minutes of the refit alone.
    pub refit_minutes: f64,
}

/// Cross-validates `spec` with each grid cell as its classifier. Every fold refits the
/// whole pipeline on the training part so no held-out statistics leak into the features.
pub fn cross_validate(spec: &PipelineSpec, grid: &ParamGrid, table: &DataTable, config: &CvConfig) -> Result<CvOutcome, SelectionError> {
    let label_col = match spec.stages.last() {
        Some(crate::pipeline::StageSpec::Classifier { label_col, .. }) => label_col.clone(),
        _ => return Err(SelectionError::NoClassifier),
    };
    let cells = grid.cells()?;
    let folds = fold_indices(table.row_count(), config.folds, config.seed)?;
    let summary = grid_search(&cells, &folds, table.row_count(), config.threads, |params, train, test| {
        let fitted = spec.with_classifier(params.clone()).fit(&table.take_rows(train))?;
        let out = fitted.transform(&table.take_rows(test))?;
        let (scores, _, labels) = scored_columns(&out, &label_col)?;
        Ok(config.metric.score(&scores, &labels)?)
    })?;
    let best = spec.with_classifier(summary.best().params.clone());
    let (model, refit_minutes) = timed_fit(|| best.fit(table));
    Ok(CvOutcome { summary, model: model?, refit_minutes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn folds_partition_rows(n in 2usize..200, k in 2usize..10, seed in 0u64..1000) {
            prop_assume!(k <= n);
            let folds = fold_indices(n, k, seed).unwrap();
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let train = training_indices(n, &folds[0]);
            prop_assert_eq!(train.len() + folds[0].len(), n);
        }
    }

    #[test]
    fn bad_fold_counts() {
        assert!(fold_indices(5, 1, 0).is_err());
        assert!(fold_indices(2, 3, 0).is_err());
    }

    #[test]
    fn ties_pick_earliest_and_failures_are_skipped() {
        let cells: Vec<ClassifierParams> = (0..3).map(|_| ClassifierParams::default_for("lr").unwrap()).collect();
        let folds = fold_indices(6, 2, 0).unwrap();
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let s = grid_search(&cells, &folds, 6, Some(2), |_, _, _| {
            calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            Ok(0.7)
        })
        .unwrap();
        assert_eq!(calls.into_inner(), 6);
        assert_eq!(s.best_index, 0);

        let fail_first = |p: &ClassifierParams, _: &[usize], _: &[usize]| match p {
            _ if std::ptr::eq(p, &cells[0]) => Err(SelectionError::EmptyGrid),
            _ => Ok(0.5),
        };
        let s = grid_search(&cells, &folds, 6, Some(1), fail_first).unwrap();
        assert_eq!(s.best_index, 1);
        assert!(s.cells[0].error.is_some());

        let err = grid_search(&cells, &folds, 6, None, |_, _, _| Err(SelectionError::EmptyGrid)).unwrap_err();
        assert!(matches!(err, SelectionError::AllCellsFailed(_)));
    }
}
