//! Random-forest regression: variance-reduction trees trained on bootstrap
//! resamples with per-node random feature subsets.
//!
//! Everything is deterministic for a given seed: tree m draws from stream m
//! of the seeded generator (first the bootstrap indices, then one feature
//! subset per node in preorder), split ties prefer the lowest feature index
//! and then the lowest threshold, and the forest prediction is the arithmetic
//! mean of its trees' predictions.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::real::{real, Real};

use super::dataset::{to_xy, DatasetRow};
use super::LearnError;

/// How many candidate features each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubset {
    /// Every feature (deterministic splits; no per-node randomness).
    All,
    /// ⌊√d⌋ features, at least one.
    Sqrt,
    /// A fixed count, clamped to the feature dimension.
    Fixed(usize),
}

impl FeatureSubset {
    fn size(self, n_features: usize) -> usize {
        match self {
            FeatureSubset::All => n_features,
            FeatureSubset::Sqrt => ((n_features as f64).sqrt().floor() as usize).max(1),
            FeatureSubset::Fixed(k) => k.clamp(1, n_features),
        }
    }
}

/// Forest training configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Nodes with fewer samples than this become leaves.
    pub min_samples_split: usize,
    pub feature_subset: FeatureSubset,
    /// When false every tree trains on the full sample (useful for comparing
    /// a single tree against an exhaustive-search oracle).
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 12,
            min_samples_split: 2,
            feature_subset: FeatureSubset::All,
            bootstrap: true,
            seed: 7,
        }
    }
}

/// One node of a regression tree, stored in an arena.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode<T> {
    Leaf {
        value: T,
    },
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

/// A regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree<T> {
    pub nodes: Vec<TreeNode<T>>,
}

impl<T: Real> RegressionTree<T> {
    pub fn predict(&self, x: &[T]) -> T {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }
}

/// Trained forest model.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel<T> {
    pub n_features: usize,
    pub trees: Vec<RegressionTree<T>>,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub feature_subset: FeatureSubset,
    pub bootstrap: bool,
    /// Base seed; tree m draws from stream m.
    pub seed: u64,
}

impl<T: Real> ForestModel<T> {
    /// Arithmetic mean of the trees' predictions.
    pub fn predict(&self, features: &[T]) -> T {
        assert_eq!(features.len(), self.n_features, "feature length mismatch");
        let sum: T = self.trees.iter().map(|t| t.predict(features)).sum();
        sum / real::<T>(self.trees.len() as f64)
    }
}

struct TreeBuilder<'a, T> {
    xs: &'a [Vec<T>],
    ys: &'a [T],
    n_features: usize,
    max_depth: usize,
    min_samples_split: usize,
    subset_size: usize,
    nodes: Vec<TreeNode<T>>,
}

impl<T: Real> TreeBuilder<'_, T> {
    fn mean_of(&self, idx: &[usize]) -> T {
        let sum: T = idx.iter().map(|&i| self.ys[i]).sum();
        sum / real::<T>(idx.len() as f64)
    }

    fn sse_of(&self, idx: &[usize]) -> T {
        let mean = self.mean_of(idx);
        idx.iter()
            .map(|&i| (self.ys[i] - mean) * (self.ys[i] - mean))
            .sum()
    }

    /// Candidate features for one split: a uniform draw of `subset_size`
    /// distinct features, reported in ascending order so the lowest-index
    /// tie rule is independent of draw order.
    fn draw_subset(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..self.n_features).collect();
        for k in 0..self.subset_size {
            let j = rng.gen_range(k..pool.len());
            pool.swap(k, j);
        }
        let mut subset = pool[..self.subset_size].to_vec();
        subset.sort_unstable();
        subset
    }

    /// Best (feature, threshold) by summed-squared-error reduction over the
    /// candidate features, or None when nothing improves on the parent.
    /// Ties favour the lowest feature, then the lowest threshold (guaranteed
    /// by scanning features and thresholds in ascending order and requiring
    /// strict improvement).
    fn best_split(&self, idx: &[usize], features: &[usize]) -> Option<(usize, T)> {
        let parent_sse = self.sse_of(idx);
        let min_gain = T::epsilon() * (T::one() + parent_sse);
        let mut best: Option<(T, usize, T)> = None;
        for &f in features {
            let mut pairs: Vec<(T, T)> = idx.iter().map(|&i| (self.xs[i][f], self.ys[i])).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));
            // Prefix sums of labels and squared labels.
            let mut sum = T::zero();
            let mut sum_sq = T::zero();
            let prefix: Vec<(T, T)> = pairs
                .iter()
                .map(|&(_, y)| {
                    sum += y;
                    sum_sq += y * y;
                    (sum, sum_sq)
                })
                .collect();
            let total = prefix[prefix.len() - 1];
            let n = pairs.len();
            for split in 1..n {
                if pairs[split - 1].0 == pairs[split].0 {
                    continue; // threshold must separate distinct values
                }
                let threshold = (pairs[split - 1].0 + pairs[split].0) / real::<T>(2.0);
                let (ls, lq) = prefix[split - 1];
                let (ts, tq) = total;
                let (rs, rq) = (ts - ls, tq - lq);
                let nl = real::<T>(split as f64);
                let nr = real::<T>((n - split) as f64);
                let sse = (lq - ls * ls / nl) + (rq - rs * rs / nr);
                let gain = parent_sse - sse;
                if gain > min_gain && best.map_or(true, |(g, _, _)| gain > g) {
                    best = Some((gain, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn build(&mut self, idx: &mut Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let leaf = |b: &mut Self, idx: &[usize]| {
            b.nodes.push(TreeNode::Leaf { value: b.mean_of(idx) });
            b.nodes.len() - 1
        };
        if depth >= self.max_depth || idx.len() < self.min_samples_split {
            return leaf(self, idx);
        }
        let subset = self.draw_subset(rng);
        let Some((feature, threshold)) = self.best_split(idx, &subset) else {
            return leaf(self, idx);
        };
        let (mut left, mut right): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.xs[i][feature] <= threshold);
        debug_assert!(!left.is_empty() && !right.is_empty());
        // Reserve this node's slot, then build children in preorder.
        let slot = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { value: T::zero() });
        let left_idx = self.build(&mut left, depth + 1, rng);
        let right_idx = self.build(&mut right, depth + 1, rng);
        self.nodes[slot] = TreeNode::Split {
            feature,
            threshold,
            left: left_idx,
            right: right_idx,
        };
        slot
    }
}

/// Trains a random forest on labelled rows.
pub fn fit_forest<T: Real>(
    rows: &[DatasetRow<T>],
    config: &ForestConfig,
) -> Result<ForestModel<T>, LearnError> {
    let (xs, ys) = to_xy(rows);
    fit_forest_raw(&xs, &ys, config)
}

/// Trains a random forest on raw feature rows.
pub(crate) fn fit_forest_raw<T: Real>(
    xs: &[Vec<T>],
    ys: &[T],
    config: &ForestConfig,
) -> Result<ForestModel<T>, LearnError> {
    if xs.len() < 2 {
        return Err(LearnError::TooFewRows {
            got: xs.len(),
            need: 2,
        });
    }
    if config.n_trees == 0 {
        return Err(LearnError::InvalidHyperparameter(
            "forest needs at least one tree".into(),
        ));
    }
    if config.max_depth == 0 {
        return Err(LearnError::InvalidHyperparameter(
            "tree depth must be at least 1".into(),
        ));
    }
    if config.min_samples_split < 2 {
        return Err(LearnError::InvalidHyperparameter(
            "min_samples_split must be at least 2".into(),
        ));
    }
    let n = xs.len();
    let n_features = xs[0].len();
    let subset_size = config.feature_subset.size(n_features);

    let mut trees = Vec::with_capacity(config.n_trees);
    for m in 0..config.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(m as u64);
        let mut sample: Vec<usize> = if config.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut builder = TreeBuilder {
            xs,
            ys,
            n_features,
            max_depth: config.max_depth,
            min_samples_split: config.min_samples_split,
            subset_size,
            nodes: Vec::new(),
        };
        let root = builder.build(&mut sample, 0, &mut rng);
        debug_assert_eq!(root, 0);
        trees.push(RegressionTree {
            nodes: builder.nodes,
        });
    }
    Ok(ForestModel {
        n_features,
        trees,
        max_depth: config.max_depth,
        min_samples_split: config.min_samples_split,
        feature_subset: config.feature_subset,
        bootstrap: config.bootstrap,
        seed: config.seed,
    })
}
