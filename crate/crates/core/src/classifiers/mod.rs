//! Six binary classifier families behind one [`Trainer`] interface, looked up by name in a
//! [`Registry`]. Every fit yields a [`TrainedClassifier`] that scores single feature vectors.

mod dataset;
mod fm;
mod forest;
mod gbt;
mod logistic;
mod params;
mod registry;
mod svm;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::FeatureVector;

pub use dataset::{Dataset, LabeledRow};
pub use fm::fm_objective;
pub use logistic::logistic_objective;
pub use params::{
    ClassifierParams, FeatureSubset, Family, FmParams, ForestParams, GbtParams, LogisticParams, SvmParams, TreeParams,
};
pub use registry::{registry, GridAxis, Registry, Trainer};
pub use svm::hinge_objective;
pub use tree::{DecisionTree, TreeNode};

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("unknown classifier family {0:?}; expected one of lr, dt, rf, fm, gbt, svm")]
    UnknownFamily(String),
    #[error("{family} has no parameter {name:?}")]
    UnknownParam { family: Family, name: String },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid training data: {0}")]
    InvalidData(String),
    #[error("feature vector has size {found}, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("row {row} contains a non-finite feature value")]
    NonFinite { row: usize },
    #[error("feature vector contains a non-finite value")]
    NonFiniteInput,
    #[error("{0} needs both classes in the training labels")]
    SingleClass(Family),
    #[error("{0} does not expose feature importances; supported: dt, rf, gbt")]
    ImportanceUnsupported(Family),
    #[error("importance weights invalid: {0}")]
    InvalidImportances(String),
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `w . x + b`, summed left to right. Both linear families and the FM linear part use this.
pub fn linear_score(weights: &[f64], intercept: f64, x: &[f64]) -> f64 {
    let mut s = 0.0;
    for (w, v) in weights.iter().zip(x) {
        s += w * v;
    }
    s + intercept
}

/// 64-bit mixing step used to derive independent child seeds from one master seed.
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn child_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Factorization machine parameters; `factors` is row-major `dim x factor_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmModel {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub factor_dim: usize,
    pub factors: Vec<f64>,
}

impl FmModel {
    /// Pairwise interaction term `1/2 * sum_f [(sum_i v_if x_i)^2 - sum_i v_if^2 x_i^2]`.
    pub fn interaction(&self, x: &[f64]) -> f64 {
        let k = self.factor_dim;
        let mut total = 0.0;
        for f in 0..k {
            let mut s = 0.0;
            let mut sq = 0.0;
            for (i, xi) in x.iter().enumerate() {
                let v = self.factors[i * k + f] * xi;
                s += v;
                sq += v * v;
            }
            total += s * s - sq;
        }
        0.5 * total
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let linear = linear_score(&self.weights, self.intercept, x);
        if self.factors.iter().all(|v| *v == 0.0) {
            linear
        } else {
            linear + self.interaction(x)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelBody {
    Linear { weights: Vec<f64>, intercept: f64 },
    Tree { tree: DecisionTree },
    Forest { trees: Vec<DecisionTree> },
    Boosted { base_score: f64, learning_rate: f64, trees: Vec<DecisionTree> },
    Fm(FmModel),
}

/// Output for one feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    /// Margin for LR and SVM, class-1 probability for DT and RF, additive score for GBT and FM.
    pub raw_score: f64,
    /// `None` for SVM, which has no probabilistic output.
    pub probability: Option<f64>,
    pub prediction: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub family: Family,
    pub dim: usize,
    /// Probability cut-off; ignored by SVM, which predicts 1 when the margin is positive.
    pub threshold: f64,
    pub body: ModelBody,
}

impl TrainedClassifier {
    pub fn predict(&self, features: &FeatureVector) -> Result<Prediction, ClassifierError> {
        if features.size() != self.dim {
            return Err(ClassifierError::DimensionMismatch { expected: self.dim, found: features.size() });
        }
        if !features.is_finite() {
            return Err(ClassifierError::NonFiniteInput);
        }
        Ok(self.predict_dense(&features.to_dense()))
    }

    /// Scores a dense row without validation; callers guarantee `x.len() == self.dim`.
    pub fn predict_dense(&self, x: &[f64]) -> Prediction {
        let (raw_score, probability) = match &self.body {
            ModelBody::Linear { weights, intercept } => {
                let m = linear_score(weights, *intercept, x);
                if self.family == Family::Svm {
                    (m, None)
                } else {
                    (m, Some(sigmoid(m)))
                }
            }
            ModelBody::Tree { tree } => {
                let p = tree.value(x);
                (p, Some(p))
            }
            ModelBody::Forest { trees } => {
                let p = trees.iter().map(|t| t.value(x)).sum::<f64>() / trees.len() as f64;
                (p, Some(p))
            }
            ModelBody::Boosted { base_score, learning_rate, trees } => {
                let mut f = *base_score;
                for t in trees {
                    f += learning_rate * t.value(x);
                }
                (f, Some(sigmoid(2.0 * f)))
            }
            ModelBody::Fm(m) => {
                let s = m.score(x);
                (s, Some(sigmoid(s)))
            }
        };
        let prediction = match probability {
            Some(p) => u8::from(p > self.threshold),
            None => u8::from(raw_score > 0.0),
        };
        Prediction { raw_score, probability, prediction }
    }

    pub fn predict_all(&self, data: &Dataset) -> Vec<Prediction> {
        (0..data.len()).map(|i| self.predict_dense(data.row(i))).collect()
    }

    /// Normalized split-gain importances, one weight per input dimension.
    pub fn feature_importances(&self) -> Result<Vec<f64>, ClassifierError> {
        let per_tree = |trees: &[DecisionTree]| {
            let mut acc = vec![0.0; self.dim];
            for t in trees {
                for (a, v) in acc.iter_mut().zip(t.importances()) {
                    *a += v;
                }
            }
            tree::normalize(&mut acc);
            acc
        };
        match &self.body {
            ModelBody::Tree { tree } => Ok(tree.importances()),
            ModelBody::Forest { trees } | ModelBody::Boosted { trees, .. } => Ok(per_tree(trees)),
            _ => Err(ClassifierError::ImportanceUnsupported(self.family)),
        }
    }
}

/// Importance weights paired with feature names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportances {
    pub names: Vec<String>,
    pub weights: Vec<f64>,
}

impl FeatureImportances {
    /// Weights must be finite, non-negative and sum to 1 within `tol`.
    pub fn new(names: Vec<String>, weights: Vec<f64>, tol: f64) -> Result<Self, ClassifierError> {
        if names.len() != weights.len() {
            return Err(ClassifierError::InvalidImportances(format!(
                "{} names but {} weights",
                names.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(ClassifierError::InvalidImportances(format!("weight {w} is negative or non-finite")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(ClassifierError::InvalidImportances(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { names, weights })
    }

    /// `(name, weight)` in descending weight order; ties keep input order.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self.names.iter().map(String::as_str).zip(self.weights.iter().copied()).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_symmetry_and_extremes() {
        for z in [-30.0, -1.0, 0.0, 2.5, 40.0] {
            assert!((sigmoid(z) + sigmoid(-z) - 1.0).abs() < 1e-15);
        }
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
    }

    #[test]
    fn predict_rejects_wrong_size_and_nonfinite() {
        let m = TrainedClassifier {
            family: Family::Lr,
            dim: 2,
            threshold: 0.5,
            body: ModelBody::Linear { weights: vec![1.0, -1.0], intercept: 0.0 },
        };
        let bad = FeatureVector::dense(vec![1.0]).unwrap();
        assert!(matches!(m.predict(&bad), Err(ClassifierError::DimensionMismatch { expected: 2, found: 1 })));
        let inf = FeatureVector::dense(vec![f64::INFINITY, 0.0]).unwrap();
        assert!(matches!(m.predict(&inf), Err(ClassifierError::NonFiniteInput)));
        let p = m.predict(&FeatureVector::dense(vec![2.0, 1.0]).unwrap()).unwrap();
        assert_eq!((p.raw_score, p.prediction), (1.0, 1));
    }

    #[test]
    fn threshold_is_strict() {
        let m = TrainedClassifier {
            family: Family::Lr,
            dim: 1,
            threshold: 0.5,
            body: ModelBody::Linear { weights: vec![0.0], intercept: 0.0 },
        };
        assert_eq!(m.predict_dense(&[3.0]).prediction, 0);
    }

    #[test]
    fn importance_validation() {
        let names = |n: usize| (0..n).map(|i| format!("f{i}")).collect::<Vec<_>>();
        assert!(FeatureImportances::new(names(2), vec![0.5, 0.5], 1e-9).is_ok());
        assert!(FeatureImportances::new(names(2), vec![0.6, 0.5], 1e-9).is_err());
        assert!(FeatureImportances::new(names(2), vec![1.1, -0.1], 1e-9).is_err());
        let fi = FeatureImportances::new(names(3), vec![0.2, 0.5, 0.3], 1e-9).unwrap();
        assert_eq!(fi.ranked()[0], ("f1", 0.5));
    }

    #[test]
    fn linear_models_have_no_importances() {
        let m = TrainedClassifier {
            family: Family::Svm,
            dim: 1,
            threshold: 0.5,
            body: ModelBody::Linear { weights: vec![1.0], intercept: 0.0 },
        };
        let err = m.feature_importances().unwrap_err();
        assert!(err.to_string().contains("dt, rf, gbt"));
    }

    #[test]
    fn child_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| child_seed(1, i)).collect();
        assert_eq!(s.len(), 1000);
    }
}
