//! Greedy CART induction shared by the single tree, the forest and the boosted ensemble.
//!
//! Candidate thresholds are midpoints between consecutive distinct feature values among the
//! node's samples. The split with the largest weighted impurity decrease wins; scanning
//! features and thresholds in ascending order with a strict comparison makes ties resolve to
//! the lowest feature index, then the lowest threshold. Samples carry integer multiplicities
//! so bootstrap draws need no row copies.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Parent impurity minus the weighted mean child impurity.
        impurity_decrease: f64,
        weight: f64,
    },
    Leaf {
        /// Class-1 probability for classification trees, mean target for regression trees.
        value: f64,
        weight: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        class_counts: Option<[f64; 2]>,
    },
}

/// Binary tree stored as an arena; node 0 is the root. `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
    pub num_features: usize,
}

impl DecisionTree {
    pub fn value(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Internal { feature, threshold, left, right, .. } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
                TreeNode::Leaf { value, .. } => return *value,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Internal { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    /// Sum of `weight * impurity_decrease` per split feature, normalized to 1 (all zeros if no split).
    pub fn importances(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.num_features];
        for node in &self.nodes {
            if let TreeNode::Internal { feature, impurity_decrease, weight, .. } = node {
                imp[*feature] += weight * impurity_decrease.max(0.0);
            }
        }
        normalize(&mut imp);
        imp
    }
}

pub(crate) fn normalize(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        for x in v.iter_mut() {
            *x /= total;
        }
    }
}

pub(crate) fn gini(c0: f64, c1: f64) -> f64 {
    let n = c0 + c1;
    if n <= 0.0 {
        return 0.0;
    }
    let p0 = c0 / n;
    let p1 = c1 / n;
    1.0 - p0 * p0 - p1 * p1
}

fn variance(w: f64, sum: f64, sum_sq: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let mean = sum / w;
    (sum_sq / w - mean * mean).max(0.0)
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Target<'a> {
    Classes(&'a [u8]),
    Values(&'a [f64]),
}

/// Running sufficient statistics of a sample set.
#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    w: f64,
    c0: f64,
    c1: f64,
    sum: f64,
    sum_sq: f64,
}

impl Stats {
    fn add(&mut self, target: Target<'_>, i: usize, w: f64) {
        self.w += w;
        match target {
            Target::Classes(y) => {
                if y[i] == 1 {
                    self.c1 += w;
                } else {
                    self.c0 += w;
                }
            }
            Target::Values(y) => {
                self.sum += w * y[i];
                self.sum_sq += w * y[i] * y[i];
            }
        }
    }

    fn minus(&self, other: &Stats) -> Stats {
        Stats {
            w: self.w - other.w,
            c0: self.c0 - other.c0,
            c1: self.c1 - other.c1,
            sum: self.sum - other.sum,
            sum_sq: self.sum_sq - other.sum_sq,
        }
    }

    fn impurity(&self, target: Target<'_>) -> f64 {
        match target {
            Target::Classes(_) => gini(self.c0, self.c1),
            Target::Values(_) => variance(self.w, self.sum, self.sum_sq),
        }
    }

    fn is_pure(&self, target: Target<'_>) -> bool {
        match target {
            Target::Classes(_) => self.c0 == 0.0 || self.c1 == 0.0,
            Target::Values(_) => self.impurity(target) <= 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeConfig {
    pub max_depth: usize,
    pub min_instances_per_node: usize,
    /// Features drawn per split; `None` scans all of them.
    pub features_per_split: Option<usize>,
}

struct Builder<'a> {
    data: &'a Dataset,
    target: Target<'a>,
    weights: &'a [f64],
    config: TreeConfig,
    rng: Option<&'a mut ChaCha8Rng>,
    nodes: Vec<TreeNode>,
}

struct Split {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

/// Grows a tree over the samples with positive weight.
pub(crate) fn build_tree(
    data: &Dataset,
    target: Target<'_>,
    weights: &[f64],
    config: TreeConfig,
    rng: Option<&mut ChaCha8Rng>,
) -> DecisionTree {
    let samples: Vec<usize> = (0..data.len()).filter(|&i| weights[i] > 0.0).collect();
    let mut b = Builder { data, target, weights, config, rng, nodes: Vec::new() };
    b.grow(samples, 0);
    DecisionTree { nodes: b.nodes, num_features: data.dim() }
}

impl Builder<'_> {
    fn stats(&self, samples: &[usize]) -> Stats {
        let mut s = Stats::default();
        for &i in samples {
            s.add(self.target, i, self.weights[i]);
        }
        s
    }

    fn leaf(&self, s: &Stats) -> TreeNode {
        match self.target {
            Target::Classes(_) => TreeNode::Leaf {
                value: if s.w > 0.0 { s.c1 / s.w } else { 0.0 },
                weight: s.w,
                class_counts: Some([s.c0, s.c1]),
            },
            Target::Values(_) => TreeNode::Leaf {
                value: if s.w > 0.0 { s.sum / s.w } else { 0.0 },
                weight: s.w,
                class_counts: None,
            },
        }
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let dim = self.data.dim();
        match (self.config.features_per_split, self.rng.as_deref_mut()) {
            (Some(k), Some(rng)) if k < dim => {
                let mut f = sample(rng, dim, k).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..dim).collect(),
        }
    }

    fn best_split(&mut self, samples: &[usize], parent: &Stats) -> Option<Split> {
        let parent_impurity = parent.impurity(self.target);
        let min_child = self.config.min_instances_per_node as f64;
        let mut best: Option<Split> = None;
        let mut order = samples.to_vec();
        for feature in self.candidate_features() {
            let data = self.data;
            order.sort_by(|&a, &b| data.value(a, feature).total_cmp(&data.value(b, feature)));
            let mut left = Stats::default();
            for pos in 0..order.len() - 1 {
                let i = order[pos];
                left.add(self.target, i, self.weights[i]);
                let lo = data.value(i, feature);
                let hi = data.value(order[pos + 1], feature);
                if lo == hi {
                    continue;
                }
                let right = parent.minus(&left);
                if left.w < min_child || right.w < min_child {
                    continue;
                }
                let n = parent.w;
                let decrease = parent_impurity
                    - (left.w / n) * left.impurity(self.target)
                    - (right.w / n) * right.impurity(self.target);
                if best.as_ref().is_none_or(|b| decrease > b.decrease) {
                    let mid = (lo + hi) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some(Split { feature, threshold, decrease });
                }
            }
        }
        best
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let stats = self.stats(&samples);
        let id = self.nodes.len();
        self.nodes.push(self.leaf(&stats));
        if depth >= self.config.max_depth
            || stats.is_pure(self.target)
            || stats.w < self.config.min_instances_per_node as f64
            || samples.len() < 2
        {
            return id;
        }
        let Some(split) = self.best_split(&samples, &stats) else {
            return id;
        };
        let (left_s, right_s): (Vec<usize>, Vec<usize>) =
            samples.iter().partition(|&&i| self.data.value(i, split.feature) <= split.threshold);
        let left = self.grow(left_s, depth + 1);
        let right = self.grow(right_s, depth + 1);
        self.nodes[id] = TreeNode::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            impurity_decrease: split.decrease,
            weight: stats.w,
        };
        id
    }
}
