use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::fm::fit_fm;
use super::forest::fit_forest;
use super::gbt::fit_gbt;
use super::logistic::fit_logistic;
use super::svm::fit_svm;
use super::tree::{build_tree, Target, TreeConfig};
use super::{
    ClassifierError, ClassifierParams, Dataset, Family, FmParams, ForestParams, GbtParams, LogisticParams, ModelBody,
    SvmParams, TrainedClassifier, TreeParams,
};

/// One hyperparameter and the values a grid search tries for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<Value>,
}

impl GridAxis {
    pub fn new(name: &str, values: Vec<Value>) -> Self {
        Self { name: name.to_string(), values }
    }
}

pub trait Trainer: Send + Sync {
    fn family(&self) -> Family;
    fn default_params(&self) -> ClassifierParams;
    /// Axes searched by cross-validation when the caller supplies none.
    fn default_grid(&self) -> Vec<GridAxis>;
    fn train(&self, params: &ClassifierParams, data: &Dataset) -> Result<TrainedClassifier, ClassifierError>;
}

fn wrong_params(expected: Family, got: &ClassifierParams) -> ClassifierError {
    ClassifierError::InvalidParam(format!("{expected} trainer given {} parameters", got.family()))
}

fn check_data(data: &Dataset) -> Result<(), ClassifierError> {
    if data.is_empty() {
        Err(ClassifierError::InvalidData("no training rows".into()))
    } else {
        Ok(())
    }
}

struct LogisticTrainer;
struct TreeTrainer;
struct ForestTrainer;
struct FmTrainer;
struct GbtTrainer;
struct SvmTrainer;

impl Trainer for LogisticTrainer {
    fn family(&self) -> Family {
        Family::Lr
    }
    fn default_params(&self) -> ClassifierParams {
        ClassifierParams::Lr(LogisticParams::default())
    }
    fn default_grid(&self) -> Vec<GridAxis> {
        vec![GridAxis::new("regParam", vec![json!(0.01), json!(0.1)])]
    }
    fn train(&self, params: &ClassifierParams, data: &Dataset) -> Result<TrainedClassifier, ClassifierError> {
        let ClassifierParams::Lr(p) = params else { return Err(wrong_params(Family::Lr, params)) };
        let fit = fit_logistic(data, p)?;
        Ok(TrainedClassifier {
            family: Family::Lr,
            dim: data.dim(),
            threshold: p.threshold,
            body: ModelBody::Linear { weights: fit.weights, intercept: fit.intercept },
        })
    }
}

impl Trainer for TreeTrainer {
    fn family(&self) -> Family {
        Family::Dt
    }
    fn default_params(&self) -> ClassifierParams {
        ClassifierParams::Dt(TreeParams::default())
    }
    fn default_grid(&self) -> Vec<GridAxis> {
        vec![GridAxis::new("maxDepth", vec![json!(3), json!(5)])]
    }
    fn train(&self, params: &ClassifierParams, data: &Dataset) -> Result<TrainedClassifier, ClassifierError> {
        let ClassifierParams::Dt(p) = params else { return Err(wrong_params(Family::Dt, params)) };
        check_data(data)?;
        let config =
            TreeConfig { max_depth: p.max_depth, min_instances_per_node: p.min_instances_per_node, features_per_split: None };
        let tree = build_tree(data, Target::Classes(data.labels()), &vec![1.0; data.len()], config, None);
        Ok(TrainedClassifier { family: Family::Dt, dim: data.dim(), threshold: p.threshold, body: ModelBody::Tree { tree } })
    }
}

impl Trainer for ForestTrainer {
    fn family(&self) -> Family {
        Family::Rf
    }
    fn default_params(&self) -> ClassifierParams {
        ClassifierParams::Rf(ForestParams::default())
    }
    fn default_grid(&self) -> Vec<GridAxis> {
        vec![GridAxis::new("maxDepth", vec![json!(3), json!(5)])]
    }
    fn train(&self, params: &ClassifierParams, data: &Dataset) -> Result<TrainedClassifier, ClassifierError> {
        let ClassifierParams::Rf(p) = params else { return Err(wrong_params(Family::Rf, params)) };
        let trees = fit_forest(data, p)?;
        Ok(TrainedClassifier { family: Family::Rf, dim: data.dim(), threshold: p.threshold, body: ModelBody::Forest { trees } })
    }
}

impl Trainer for FmTrainer {
    fn family(&self) -> Family {
        Family::Fm
    }
    fn default_params(&self) -> ClassifierParams {
        ClassifierParams::Fm(FmParams::default())
    }
    fn default_grid(&self) -> Vec<GridAxis> {
        vec![GridAxis::new("stepSize", vec![json!(0.05), json!(0.1)])]
    }
    fn train(&self, params: &ClassifierParams, data: &Dataset) -> Result<TrainedClassifier, ClassifierError> {
        let ClassifierParams::Fm(p) = params else { return Err(wrong_params(Family::Fm, params)) };
        let model = fit_fm(data, p)?;
        Ok(TrainedClassifier { family: Family::Fm, dim: data.dim(), threshold: p.threshold, body: ModelBody::Fm(model) })
    }
}

impl Trainer for GbtTrainer {
    fn family(&self) -> Family {
        Family::Gbt
    }
    fn default_params(&self) -> ClassifierParams {
        ClassifierParams::Gbt(GbtParams::default())
    }
    fn default_grid(&self) -> Vec<GridAxis> {
        vec![GridAxis::new("maxDepth", vec![json!(3), json!(5)])]
    }
    fn train(&self, params: &ClassifierParams, data: &Dataset) -> Result<TrainedClassifier, ClassifierError> {
        let ClassifierParams::Gbt(p) = params else { return Err(wrong_params(Family::Gbt, params)) };
        let fit = fit_gbt(data, p)?;
        Ok(TrainedClassifier {
            family: Family::Gbt,
            dim: data.dim(),
            threshold: p.threshold,
            body: ModelBody::Boosted { base_score: fit.base_score, learning_rate: p.learning_rate, trees: fit.trees },
        })
    }
}

impl Trainer for SvmTrainer {
    fn family(&self) -> Family {
        Family::Svm
    }
    fn default_params(&self) -> ClassifierParams {
        ClassifierParams::Svm(SvmParams::default())
    }
    fn default_grid(&self) -> Vec<GridAxis> {
        vec![
            GridAxis::new("regParam", vec![json!(0.01), json!(0.5)]),
            GridAxis::new("maxIter", vec![json!(1), json!(5)]),
            GridAxis::new("tol", vec![json!(1e-4), json!(1e-3)]),
            GridAxis::new("fitIntercept", vec![json!(true), json!(false)]),
            GridAxis::new("standardization", vec![json!(true), json!(false)]),
        ]
    }
    fn train(&self, params: &ClassifierParams, data: &Dataset) -> Result<TrainedClassifier, ClassifierError> {
        let ClassifierParams::Svm(p) = params else { return Err(wrong_params(Family::Svm, params)) };
        let (weights, intercept) = fit_svm(data, p)?;
        Ok(TrainedClassifier {
            family: Family::Svm,
            dim: data.dim(),
            threshold: 0.5,
            body: ModelBody::Linear { weights, intercept },
        })
    }
}

/// Trainers keyed by family tag.
pub struct Registry {
    trainers: Vec<Box<dyn Trainer>>,
}

impl Registry {
    pub fn builtin() -> Self {
        Self {
            trainers: vec![
                Box::new(LogisticTrainer),
                Box::new(TreeTrainer),
                Box::new(ForestTrainer),
                Box::new(FmTrainer),
                Box::new(GbtTrainer),
                Box::new(SvmTrainer),
            ],
        }
    }

    /// Case-insensitive lookup by tag (`gbt`) or display name (`GBT`).
    pub fn get(&self, name: &str) -> Result<&dyn Trainer, ClassifierError> {
        let family: Family = name.parse()?;
        self.trainers
            .iter()
            .find(|t| t.family() == family)
            .map(|t| t.as_ref())
            .ok_or_else(|| ClassifierError::UnknownFamily(name.to_string()))
    }

    pub fn families(&self) -> Vec<Family> {
        self.trainers.iter().map(|t| t.family()).collect()
    }
}

pub fn registry() -> &'static Registry {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(Registry::builtin)
}
