use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ClassifierError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lr,
    Dt,
    Rf,
    Fm,
    Gbt,
    Svm,
}

impl Family {
    /// Canonical report order.
    pub const ALL: [Family; 6] = [Family::Lr, Family::Dt, Family::Rf, Family::Fm, Family::Gbt, Family::Svm];

    pub fn tag(self) -> &'static str {
        match self {
            Family::Lr => "lr",
            Family::Dt => "dt",
            Family::Rf => "rf",
            Family::Fm => "fm",
            Family::Gbt => "gbt",
            Family::Svm => "svm",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Family::Lr => "LR",
            Family::Dt => "DT",
            Family::Rf => "RF",
            Family::Fm => "FM",
            Family::Gbt => "GBT",
            Family::Svm => "SVM",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| ClassifierError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct LogisticParams {
    pub max_iter: usize,
    pub reg_param: f64,
    pub threshold: f64,
    pub tol: f64,
    pub fit_intercept: bool,
    pub standardization: bool,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self { max_iter: 10, reg_param: 0.1, threshold: 0.5, tol: 1e-6, fit_intercept: true, standardization: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_instances_per_node: usize,
    pub threshold: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: 5, min_instances_per_node: 1, threshold: 0.5 }
    }
}

/// Number of candidate features drawn at each split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSubset {
    /// `sqrt` for classification.
    #[default]
    Auto,
    All,
    Sqrt,
    Log2,
    OneThird,
}

impl FeatureSubset {
    pub fn count(self, dim: usize) -> usize {
        let d = dim as f64;
        let k = match self {
            FeatureSubset::All => dim,
            FeatureSubset::Auto | FeatureSubset::Sqrt => d.sqrt().floor() as usize,
            FeatureSubset::Log2 => d.log2().floor().max(0.0) as usize,
            FeatureSubset::OneThird => dim / 3,
        };
        k.clamp(1, dim.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct ForestParams {
    pub num_trees: usize,
    pub max_depth: usize,
    pub min_instances_per_node: usize,
    pub feature_subset: FeatureSubset,
    /// Draw a size-n bootstrap sample per tree; off means every tree sees the full data.
    pub bootstrap: bool,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            num_trees: 100,
            max_depth: 5,
            min_instances_per_node: 1,
            feature_subset: FeatureSubset::Auto,
            bootstrap: true,
            seed: 1,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct FmParams {
    pub factor_dim: usize,
    pub init_std: f64,
    pub step_size: f64,
    /// Passes over the shuffled training data.
    pub max_iter: usize,
    pub batch_size: usize,
    pub reg_param: f64,
    pub fit_intercept: bool,
    pub fit_linear: bool,
    /// Keep the factor matrix at its initial value.
    pub freeze_factors: bool,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for FmParams {
    fn default() -> Self {
        Self {
            factor_dim: 8,
            init_std: 0.01,
            step_size: 0.1,
            max_iter: 20,
            batch_size: 128,
            reg_param: 0.0,
            fit_intercept: true,
            fit_linear: true,
            freeze_factors: false,
            seed: 1,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct GbtParams {
    pub num_iterations: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_instances_per_node: usize,
    pub subsampling_rate: f64,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            num_iterations: 20,
            learning_rate: 0.1,
            max_depth: 5,
            min_instances_per_node: 1,
            subsampling_rate: 1.0,
            seed: 1,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct SvmParams {
    pub reg_param: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub fit_intercept: bool,
    pub standardization: bool,
    /// Fixed step used when `reg_param` is 0.
    pub step_size: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { reg_param: 0.1, max_iter: 100, tol: 1e-6, fit_intercept: true, standardization: true, step_size: 0.1 }
    }
}

/// Hyperparameters for one of the six families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ClassifierParams {
    Lr(LogisticParams),
    Dt(TreeParams),
    Rf(ForestParams),
    Fm(FmParams),
    Gbt(GbtParams),
    Svm(SvmParams),
}

impl ClassifierParams {
    pub fn default_for(family: &str) -> Result<Self, ClassifierError> {
        Ok(super::registry().get(family)?.default_params())
    }

    pub fn family(&self) -> Family {
        match self {
            ClassifierParams::Lr(_) => Family::Lr,
            ClassifierParams::Dt(_) => Family::Dt,
            ClassifierParams::Rf(_) => Family::Rf,
            ClassifierParams::Fm(_) => Family::Fm,
            ClassifierParams::Gbt(_) => Family::Gbt,
            ClassifierParams::Svm(_) => Family::Svm,
        }
    }

    /// Decision threshold on the class-1 probability; `None` for the margin-based SVM.
    pub fn threshold(&self) -> Option<f64> {
        match self {
            ClassifierParams::Lr(p) => Some(p.threshold),
            ClassifierParams::Dt(p) => Some(p.threshold),
            ClassifierParams::Rf(p) => Some(p.threshold),
            ClassifierParams::Fm(p) => Some(p.threshold),
            ClassifierParams::Gbt(p) => Some(p.threshold),
            ClassifierParams::Svm(_) => None,
        }
    }

    /// Field names accepted by [`ClassifierParams::set`].
    pub fn field_names(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => map.keys().filter(|k| *k != "family").cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Returns a copy with one named field replaced, e.g. `set("regParam", 0.5)`.
    pub fn set(&self, field: &str, value: &serde_json::Value) -> Result<Self, ClassifierError> {
        let mut obj = match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => map,
            _ => unreachable!("params serialize to an object"),
        };
        if field == "family" || !obj.contains_key(field) {
            return Err(ClassifierError::UnknownParam { family: self.family(), name: field.to_string() });
        }
        obj.insert(field.to_string(), value.clone());
        let updated: Self = serde_json::from_value(serde_json::Value::Object(obj)).map_err(|e| {
            ClassifierError::InvalidParam(format!("{}: {field} = {value}: {e}", self.family()))
        })?;
        updated.validate()?;
        Ok(updated)
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        let fail = |m: &str| Err(ClassifierError::InvalidParam(format!("{}: {m}", self.family())));
        if let Some(t) = self.threshold() {
            if !(t > 0.0 && t < 1.0) {
                return fail("threshold must be in (0, 1)");
            }
        }
        match self {
            ClassifierParams::Lr(p) => {
                if p.max_iter < 1 || !(p.reg_param >= 0.0) || !(p.tol >= 0.0) {
                    return fail("need maxIter >= 1, regParam >= 0, tol >= 0");
                }
            }
            ClassifierParams::Dt(p) => {
                if p.max_depth < 1 || p.min_instances_per_node < 1 {
                    return fail("need maxDepth >= 1, minInstancesPerNode >= 1");
                }
            }
            ClassifierParams::Rf(p) => {
                if p.num_trees < 1 || p.max_depth < 1 || p.min_instances_per_node < 1 {
                    return fail("need numTrees >= 1, maxDepth >= 1, minInstancesPerNode >= 1");
                }
            }
            ClassifierParams::Fm(p) => {
                if p.max_iter < 1 || p.batch_size < 1 || !(p.init_std >= 0.0) || !(p.step_size >= 0.0) || !(p.reg_param >= 0.0) {
                    return fail("need maxIter >= 1, batchSize >= 1, initStd >= 0, stepSize >= 0, regParam >= 0");
                }
            }
            ClassifierParams::Gbt(p) => {
                if p.num_iterations < 1
                    || p.max_depth < 1
                    || p.min_instances_per_node < 1
                    || !(p.learning_rate >= 0.0)
                    || !(p.subsampling_rate > 0.0 && p.subsampling_rate <= 1.0)
                {
                    return fail("need numIterations >= 1, maxDepth >= 1, learningRate >= 0, subsamplingRate in (0, 1]");
                }
            }
            ClassifierParams::Svm(p) => {
                if p.max_iter < 1 || !(p.reg_param >= 0.0) || !(p.tol >= 0.0) || !(p.step_size > 0.0) {
                    return fail("need maxIter >= 1, regParam >= 0, tol >= 0, stepSize > 0");
                }
            }
        }
        Ok(())
    }

    pub fn train(&self, data: &super::Dataset) -> Result<super::TrainedClassifier, ClassifierError> {
        self.validate()?;
        super::registry().get(self.family().tag())?.train(self, data)
    }
}
