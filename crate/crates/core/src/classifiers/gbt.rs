//! Gradient-boosted regression trees on the logistic loss `log(1 + exp(-2 y F))`, `y` in {-1, 1}.
//! Each round fits a variance-impurity tree to the negative gradient and takes the leaf mean
//! as its output. The probability of class 1 is `sigmoid(2F)`.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tree::{build_tree, DecisionTree, Target, TreeConfig};
use super::{child_seed, ClassifierError, Dataset, Family, GbtParams};

pub(crate) struct BoostedFit {
    pub base_score: f64,
    pub trees: Vec<DecisionTree>,
}

/// Initial score: half the log-odds of the positive rate.
pub(crate) fn base_score(data: &Dataset) -> Result<f64, ClassifierError> {
    let pos = data.positives();
    if pos == 0 || pos == data.len() {
        return Err(ClassifierError::SingleClass(Family::Gbt));
    }
    let p = pos as f64 / data.len() as f64;
    Ok(0.5 * (p / (1.0 - p)).ln())
}

pub(crate) fn fit_gbt(data: &Dataset, p: &GbtParams) -> Result<BoostedFit, ClassifierError> {
    let f0 = base_score(data)?;
    let n = data.len();
    let y: Vec<f64> = data.labels().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let mut f = vec![f0; n];
    let mut residual = vec![0.0; n];
    let config = TreeConfig {
        max_depth: p.max_depth,
        min_instances_per_node: p.min_instances_per_node,
        features_per_split: None,
    };
    let mut trees = Vec::with_capacity(p.num_iterations);
    for round in 0..p.num_iterations {
        for i in 0..n {
            residual[i] = 2.0 * y[i] / (1.0 + (2.0 * y[i] * f[i]).exp());
        }
        let weights = if p.subsampling_rate < 1.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(child_seed(p.seed, round as u64));
            let k = ((p.subsampling_rate * n as f64).round() as usize).clamp(1, n);
            let mut w = vec![0.0; n];
            for i in sample(&mut rng, n, k) {
                w[i] = 1.0;
            }
            w
        } else {
            vec![1.0; n]
        };
        let tree = build_tree(data, Target::Values(&residual), &weights, config, None);
        for (i, fi) in f.iter_mut().enumerate() {
            *fi += p.learning_rate * tree.value(data.row(i));
        }
        trees.push(tree);
    }
    Ok(BoostedFit { base_score: f0, trees })
}
