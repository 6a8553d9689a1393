//! Bagged CART ensemble. Tree `t` draws its bootstrap sample and split candidates from its
//! own generator seeded by `(seed, t)`, so the result does not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tree::{build_tree, DecisionTree, Target, TreeConfig};
use super::{child_seed, ClassifierError, Dataset, FeatureSubset, ForestParams};

pub(crate) fn fit_forest(data: &Dataset, p: &ForestParams) -> Result<Vec<DecisionTree>, ClassifierError> {
    if data.is_empty() {
        return Err(ClassifierError::InvalidData("no training rows".into()));
    }
    let n = data.len();
    let features_per_split = match p.feature_subset {
        FeatureSubset::All => None,
        other => Some(other.count(data.dim())),
    };
    let config = TreeConfig { max_depth: p.max_depth, min_instances_per_node: p.min_instances_per_node, features_per_split };
    let trees = (0..p.num_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(child_seed(p.seed, t as u64));
            let mut weights = vec![0.0; n];
            if p.bootstrap {
                for _ in 0..n {
                    weights[rng.random_range(0..n)] += 1.0;
                }
            } else {
                weights.fill(1.0);
            }
            build_tree(data, Target::Classes(data.labels()), &weights, config, Some(&mut rng))
        })
        .collect();
    Ok(trees)
}
