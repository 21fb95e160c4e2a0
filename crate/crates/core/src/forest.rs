//! From-scratch random forest over the ego features.
//!
//! Trees are exact CART classifiers grown to purity (no depth limit) on
//! bootstrap resamples, with a random feature subset considered at every
//! split and midpoint thresholds between consecutive sorted values. The
//! split criterion is picked by a small two-fold grid search when not fixed.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contagion::Mechanism;
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_NAMES};
use crate::scalar::Real;
use crate::seeds;

const MODEL_VERSION: u32 = 1;

/// Labelled feature rows plus provenance ids for train/test hygiene.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<T>>,
    pub labels: Vec<Mechanism>,
    /// Stable per-row ids (experiment, cell, cascade, node) so disjointness
    /// of train and test sets can be checked at evaluation time.
    pub row_ids: Vec<u64>,
}

impl<T: Real> Dataset<T> {
    pub fn new(feature_names: Vec<String>) -> Self {
        Dataset {
            feature_names,
            rows: Vec::new(),
            labels: Vec::new(),
            row_ids: Vec::new(),
        }
    }

    /// Dataset over the eight ego features.
    pub fn of_ego_features() -> Self {
        Self::new(FEATURE_NAMES.iter().map(|s| s.to_string()).collect())
    }

    pub fn push(&mut self, features: &FeatureVector<T>, label: Mechanism, row_id: u64) {
        self.rows.push(features.as_array().to_vec());
        self.labels.push(label);
        self.row_ids.push(row_id);
    }

    pub fn push_raw(&mut self, row: Vec<T>, label: Mechanism, row_id: u64) {
        debug_assert_eq!(row.len(), self.feature_names.len());
        self.rows.push(row);
        self.labels.push(label);
        self.row_ids.push(row_id);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0usize; 3];
        for &l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    pub fn select(&self, indices: &[usize]) -> Dataset<T> {
        Dataset {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            row_ids: indices.iter().map(|&i| self.row_ids[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Gini,
    Entropy,
}

impl Criterion {
    fn impurity<T: Real>(self, counts: &[usize; 3], total: usize) -> T {
        if total == 0 {
            return T::zero();
        }
        let tot = T::from_count(total);
        match self {
            Criterion::Gini => {
                let mut acc = T::one();
                for &c in counts {
                    let p = T::from_count(c) / tot;
                    acc = acc - p * p;
                }
                acc
            }
            Criterion::Entropy => {
                let mut acc = T::zero();
                for &c in counts {
                    if c > 0 {
                        let p = T::from_count(c) / tot;
                        acc = acc - p * p.log2();
                    }
                }
                acc
            }
        }
    }
}

/// Training configuration. `criterion = None` runs the two-fold grid search;
/// `features_per_split = None` uses ceil(sqrt(active features)).
#[derive(Debug, Clone)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub criterion: Option<Criterion>,
    pub features_per_split: Option<usize>,
    /// Restrict splits to these feature indices (best-subset search).
    pub feature_subset: Option<Vec<usize>>,
    pub seed: u64,
}

impl ForestConfig {
    pub fn new(seed: u64) -> Self {
        ForestConfig {
            n_trees: 100,
            criterion: None,
            features_per_split: None,
            feature_subset: None,
            seed,
        }
    }

    pub fn with_trees(mut self, n: usize) -> Self {
        self.n_trees = n;
        self
    }

    pub fn with_criterion(mut self, c: Criterion) -> Self {
        self.criterion = Some(c);
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode<T> {
    Split {
        feature: usize,
        threshold: T,
        /// Impurity decrease weighted by the node's bootstrap share, for
        /// feature importances.
        gain: T,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: [u32; 3],
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tree<T> {
    pub nodes: Vec<TreeNode<T>>,
}

impl<T: Real> Tree<T> {
    fn vote(&self, row: &[T]) -> Mechanism {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
                TreeNode::Leaf { counts } => {
                    return argmax_counts(counts);
                }
            }
        }
    }
}

fn argmax_counts(counts: &[u32; 3]) -> Mechanism {
    // priority order Sm > Cx > St breaks ties deterministically
    let mut best = Mechanism::Sm;
    for m in [Mechanism::Cx, Mechanism::St] {
        if counts[m.index()] > counts[best.index()] {
            best = m;
        }
    }
    best
}

/// Trained ensemble; immutable and shareable across threads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel<T> {
    pub version: u32,
    pub feature_names: Vec<String>,
    pub criterion: Criterion,
    pub features_per_split: usize,
    pub feature_subset: Vec<usize>,
    pub seed: u64,
    pub trees: Vec<Tree<T>>,
    /// Sorted provenance ids of the training rows.
    pub train_row_ids: Vec<u64>,
}

/// Prediction with ensemble certainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub label: Mechanism,
    /// Vote share of the winning class.
    pub certainty: T,
    /// Per-class vote fractions, indexed by [`Mechanism::index`].
    pub votes: [T; 3],
}

/// 3x3 confusion counts; rows are true labels, columns predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 3]; 3],
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let trace: usize = (0..3).map(|i| self.counts[i][i]).sum();
        trace as f64 / self.total().max(1) as f64
    }

    /// Per-class recall (diagonal over row sum); `None` for absent classes.
    pub fn recall(&self, class: Mechanism) -> Option<f64> {
        let i = class.index();
        let row: usize = self.counts[i].iter().sum();
        (row > 0).then(|| self.counts[i][i] as f64 / row as f64)
    }

    /// Column sums: how many rows were predicted per class.
    pub fn predicted_counts(&self) -> [usize; 3] {
        let mut out = [0usize; 3];
        for row in &self.counts {
            for (j, &c) in row.iter().enumerate() {
                out[j] += c;
            }
        }
        out
    }
}

struct TreeBuilder<'a, T> {
    data: &'a Dataset<T>,
    criterion: Criterion,
    features_per_split: usize,
    active_features: &'a [usize],
    boot_total: usize,
    nodes: Vec<TreeNode<T>>,
}

impl<'a, T: Real> TreeBuilder<'a, T> {
    fn class_counts(&self, indices: &[usize]) -> [usize; 3] {
        let mut counts = [0usize; 3];
        for &i in indices {
            counts[self.data.labels[i].index()] += 1;
        }
        counts
    }

    /// Best (threshold, weighted child impurity) for one feature, or `None`
    /// when the feature is constant on this node.
    fn best_split_on(
        &self,
        indices: &[usize],
        feature: usize,
        parent_counts: &[usize; 3],
    ) -> Option<(T, T)> {
        let mut pairs: Vec<(T, Mechanism)> = indices
            .iter()
            .map(|&i| (self.data.rows[i][feature], self.data.labels[i]))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let n = pairs.len();
        let mut left = [0usize; 3];
        let mut best: Option<(T, T)> = None;
        for i in 0..n - 1 {
            left[pairs[i].1.index()] += 1;
            if pairs[i].0 == pairs[i + 1].0 {
                continue;
            }
            let n_left = i + 1;
            let n_right = n - n_left;
            let mut right = [0usize; 3];
            for c in 0..3 {
                right[c] = parent_counts[c] - left[c];
            }
            let w_imp = (T::from_count(n_left) * self.criterion.impurity::<T>(&left, n_left)
                + T::from_count(n_right) * self.criterion.impurity::<T>(&right, n_right))
                / T::from_count(n);
            // midpoints between adjacent representable values can round up
            // to the right value, which would empty the right child
            let mut threshold = (pairs[i].0 + pairs[i + 1].0) / T::from_config(2.0);
            if threshold >= pairs[i + 1].0 {
                threshold = pairs[i].0;
            }
            if best.map_or(true, |(_, b)| w_imp < b) {
                best = Some((threshold, w_imp));
            }
        }
        best
    }

    fn leaf_counts(counts: &[usize; 3]) -> TreeNode<T> {
        let mut c32 = [0u32; 3];
        for (i, &c) in counts.iter().enumerate() {
            c32[i] = c as u32;
        }
        TreeNode::Leaf { counts: c32 }
    }

    /// Grows the tree with an explicit work stack; degenerate chains on
    /// duplicate-heavy features would otherwise exhaust the call stack.
    fn build(&mut self, indices: Vec<usize>, rng: &mut rand_chacha::ChaCha8Rng) {
        self.nodes.push(TreeNode::Leaf { counts: [0; 3] });
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, indices)];
        while let Some((slot, indices)) = stack.pop() {
            let counts = self.class_counts(&indices);
            let total = indices.len();
            let parent_impurity = self.criterion.impurity::<T>(&counts, total);
            if total < 2 || parent_impurity <= T::zero() {
                self.nodes[slot] = Self::leaf_counts(&counts);
                continue;
            }

            // candidate features without replacement, falling back to the
            // full active set when none of the sampled ones can split
            let mut sampled = self.active_features.to_vec();
            sampled.shuffle(rng);
            sampled.truncate(self.features_per_split);
            let mut choice: Option<(usize, T, T)> = None;
            for pass in 0..2 {
                let candidates: &[usize] = if pass == 0 { &sampled } else { self.active_features };
                for &f in candidates {
                    if let Some((thr, w_imp)) = self.best_split_on(&indices, f, &counts) {
                        if choice.map_or(true, |(_, _, b)| w_imp < b) {
                            choice = Some((f, thr, w_imp));
                        }
                    }
                }
                if choice.is_some() {
                    break;
                }
            }
            let splittable = choice
                .filter(|&(_, _, w_imp)| parent_impurity - w_imp > T::zero());
            let Some((feature, threshold, w_imp)) = splittable else {
                // no strict impurity decrease available
                self.nodes[slot] = Self::leaf_counts(&counts);
                continue;
            };

            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                .iter()
                .partition(|&&i| self.data.rows[i][feature] <= threshold);
            if left_idx.is_empty() || right_idx.is_empty() {
                self.nodes[slot] = Self::leaf_counts(&counts);
                continue;
            }
            let gain =
                (parent_impurity - w_imp) * T::from_count(total) / T::from_count(self.boot_total);
            let left = self.nodes.len();
            self.nodes.push(TreeNode::Leaf { counts: [0; 3] });
            let right = self.nodes.len();
            self.nodes.push(TreeNode::Leaf { counts: [0; 3] });
            self.nodes[slot] = TreeNode::Split {
                feature,
                threshold,
                gain,
                left,
                right,
            };
            stack.push((right, right_idx));
            stack.push((left, left_idx));
        }
    }
}

fn train_with_criterion<T: Real>(
    data: &Dataset<T>,
    config: &ForestConfig,
    criterion: Criterion,
) -> ForestModel<T> {
    let d = data.feature_names.len();
    let active: Vec<usize> = config
        .feature_subset
        .clone()
        .unwrap_or_else(|| (0..d).collect());
    let features_per_split = config
        .features_per_split
        .unwrap_or_else(|| (active.len() as f64).sqrt().ceil() as usize)
        .clamp(1, active.len());
    let n = data.len();

    let trees: Vec<Tree<T>> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeds::rng_for(config.seed, &[0x7472, t as u64]);
            let boot: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut builder = TreeBuilder {
                data,
                criterion,
                features_per_split,
                active_features: &active,
                boot_total: n,
                nodes: Vec::new(),
            };
            builder.build(boot, &mut rng);
            Tree {
                nodes: builder.nodes,
            }
        })
        .collect();

    let mut train_row_ids = data.row_ids.clone();
    train_row_ids.sort_unstable();
    train_row_ids.dedup();

    ForestModel {
        version: MODEL_VERSION,
        feature_names: data.feature_names.clone(),
        criterion,
        features_per_split,
        feature_subset: active,
        seed: config.seed,
        trees,
        train_row_ids,
    }
}

/// Accuracy of a small validation forest, for the criterion grid search.
fn validation_accuracy<T: Real>(
    train: &Dataset<T>,
    test: &Dataset<T>,
    config: &ForestConfig,
    criterion: Criterion,
    fold: u64,
) -> f64 {
    let mut cfg = config.clone();
    cfg.n_trees = (config.n_trees / 4).clamp(10, 50);
    cfg.seed = seeds::child_seed(config.seed, &[0x6373, fold]);
    let model = train_with_criterion(train, &cfg, criterion);
    let mut correct = 0usize;
    for (row, &label) in test.rows.iter().zip(&test.labels) {
        if predict(&model, row).unwrap().label == label {
            correct += 1;
        }
    }
    correct as f64 / test.len().max(1) as f64
}

/// Trains the ensemble. Deterministic for a fixed `(data, config)`. A
/// single-class dataset yields a degenerate constant predictor.
pub fn train<T: Real>(data: &Dataset<T>, config: &ForestConfig) -> Result<ForestModel<T>> {
    if data.is_empty() {
        return Err(Error::Config("cannot train on an empty dataset".into()));
    }
    if config.n_trees == 0 {
        return Err(Error::Parameter("n_trees must be >= 1".into()));
    }
    if let Some(subset) = &config.feature_subset {
        if subset.is_empty() || subset.iter().any(|&f| f >= data.feature_names.len()) {
            return Err(Error::Config("invalid feature subset".into()));
        }
    }

    let criterion = match config.criterion {
        Some(c) => c,
        None => {
            // two-fold validation split over {gini, entropy}
            let mut indices: Vec<usize> = (0..data.len()).collect();
            let mut rng = seeds::rng_for(config.seed, &[0x6776]);
            indices.shuffle(&mut rng);
            let (a, b) = indices.split_at(indices.len() / 2);
            if a.is_empty() || b.is_empty() {
                Criterion::Gini
            } else {
                let (da, db) = (data.select(a), data.select(b));
                let score = |c: Criterion| {
                    validation_accuracy(&da, &db, config, c, 0)
                        + validation_accuracy(&db, &da, config, c, 1)
                };
                let (gini, entropy) = (score(Criterion::Gini), score(Criterion::Entropy));
                if entropy > gini {
                    Criterion::Entropy
                } else {
                    Criterion::Gini
                }
            }
        }
    };
    Ok(train_with_criterion(data, config, criterion))
}

/// Majority vote across trees with per-class vote fractions.
pub fn predict<T: Real>(model: &ForestModel<T>, row: &[T]) -> Result<Prediction<T>> {
    if row.len() != model.feature_names.len() {
        return Err(Error::Config(format!(
            "feature dimension {} does not match model ({})",
            row.len(),
            model.feature_names.len()
        )));
    }
    let mut counts = [0usize; 3];
    for tree in &model.trees {
        counts[tree.vote(row).index()] += 1;
    }
    let n = T::from_count(model.trees.len());
    let votes = [
        T::from_count(counts[0]) / n,
        T::from_count(counts[1]) / n,
        T::from_count(counts[2]) / n,
    ];
    let mut label = Mechanism::Sm;
    for m in [Mechanism::Cx, Mechanism::St] {
        if counts[m.index()] > counts[label.index()] {
            label = m;
        }
    }
    Ok(Prediction {
        label,
        certainty: votes[label.index()],
        votes,
    })
}

/// Confusion matrix and accuracy on held-out rows. Rows that overlap the
/// training set (by provenance id) are rejected.
pub fn evaluate<T: Real>(
    model: &ForestModel<T>,
    test: &Dataset<T>,
) -> Result<(ConfusionMatrix, f64)> {
    if test.is_empty() {
        return Err(Error::Config("empty test set".into()));
    }
    for id in &test.row_ids {
        if model.train_row_ids.binary_search(id).is_ok() {
            return Err(Error::Config(format!(
                "test row {id} appears in the training set"
            )));
        }
    }
    let mut counts = [[0usize; 3]; 3];
    for (row, &label) in test.rows.iter().zip(&test.labels) {
        let pred = predict(model, row)?;
        counts[label.index()][pred.label.index()] += 1;
    }
    let cm = ConfusionMatrix { counts };
    let acc = cm.accuracy();
    Ok((cm, acc))
}

/// Mean impurity decrease per feature, normalised to sum 1, ranked
/// descending (stable on ties).
pub fn feature_importance<T: Real>(model: &ForestModel<T>) -> Vec<(String, T)> {
    let d = model.feature_names.len();
    let mut raw = vec![T::zero(); d];
    for tree in &model.trees {
        for node in &tree.nodes {
            if let TreeNode::Split { feature, gain, .. } = node {
                raw[*feature] = raw[*feature] + *gain;
            }
        }
    }
    let total: T = raw.iter().copied().sum();
    if total > T::zero() {
        for v in &mut raw {
            *v = *v / total;
        }
    }
    let mut ranked: Vec<(String, T)> = model
        .feature_names
        .iter()
        .cloned()
        .zip(raw)
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    ranked
}

/// Protocol for the exhaustive best-subset search.
#[derive(Debug, Clone)]
pub struct SubsetProtocol {
    /// Fraction of rows used for training; the rest evaluates each subset.
    pub train_fraction: f64,
    pub forest: ForestConfig,
    pub seed: u64,
}

/// Result for one subset size.
#[derive(Debug, Clone)]
pub struct SubsetReport {
    pub k: usize,
    pub best_accuracy: f64,
    /// Every subset reaching the best accuracy (ties reported together).
    pub best_subsets: Vec<Vec<usize>>,
    /// How often each feature appears among the tying best subsets.
    pub feature_frequency: Vec<f64>,
}

/// Exhaustively searches feature subsets up to `max_k`, reporting the
/// accuracy-maximising subsets per size.
pub fn best_subset_search<T: Real>(
    data: &Dataset<T>,
    max_k: usize,
    protocol: &SubsetProtocol,
) -> Result<Vec<SubsetReport>> {
    let d = data.feature_names.len();
    if max_k == 0 || max_k > d {
        return Err(Error::Parameter(format!("max_k = {max_k} not in [1, {d}]")));
    }
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut rng = seeds::rng_for(protocol.seed, &[0x7362]);
    indices.shuffle(&mut rng);
    let n_train = ((data.len() as f64) * protocol.train_fraction).round() as usize;
    let n_train = n_train.clamp(1, data.len() - 1);
    let train_set = data.select(&indices[..n_train]);
    let test_set = data.select(&indices[n_train..]);

    let mut reports = Vec::new();
    for k in 1..=max_k {
        let combos: Vec<Vec<usize>> = combinations(d, k);
        let accs: Vec<f64> = combos
            .par_iter()
            .enumerate()
            .map(|(i, combo)| {
                let mut cfg = protocol.forest.clone();
                cfg.feature_subset = Some(combo.clone());
                cfg.seed = seeds::child_seed(protocol.forest.seed, &[k as u64, i as u64]);
                let model = train(&train_set, &cfg).expect("training on a subset");
                let mut correct = 0usize;
                for (row, &label) in test_set.rows.iter().zip(&test_set.labels) {
                    if predict(&model, row).unwrap().label == label {
                        correct += 1;
                    }
                }
                correct as f64 / test_set.len() as f64
            })
            .collect();
        let best = accs.iter().cloned().fold(f64::MIN, f64::max);
        let best_subsets: Vec<Vec<usize>> = combos
            .iter()
            .zip(&accs)
            .filter(|(_, &a)| a == best)
            .map(|(c, _)| c.clone())
            .collect();
        let mut freq = vec![0.0; d];
        for s in &best_subsets {
            for &f in s {
                freq[f] += 1.0;
            }
        }
        for f in &mut freq {
            *f /= best_subsets.len() as f64;
        }
        reports.push(SubsetReport {
            k,
            best_accuracy: best,
            best_subsets,
            feature_frequency: freq,
        });
    }
    Ok(reports)
}

fn combinations(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    rec(0, d, k, &mut cur, &mut out);
    out
}

/// Versioned JSON model serialisation.
pub fn save_model<T: Real>(model: &ForestModel<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer(&mut w, model)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model<T: Real>(path: impl AsRef<Path>) -> Result<ForestModel<T>> {
    let path = path.as_ref();
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = String::new();
    file.read_to_string(&mut buf).map_err(|e| Error::io(path, e))?;
    let model: ForestModel<T> = serde_json::from_str(&buf)?;
    if model.version != MODEL_VERSION {
        return Err(Error::Config(format!(
            "unsupported model version {} (expected {MODEL_VERSION})",
            model.version
        )));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two classes separable on feature 0, with noise features.
    fn separable_toy(n_per_class: usize, d: usize) -> Dataset<f64> {
        let names = (0..d).map(|i| format!("f{i}")).collect();
        let mut data = Dataset::new(names);
        let mut rng = seeds::rng_for(1234, &[]);
        for i in 0..n_per_class {
            let mut row0 = vec![0.0; d];
            let mut row1 = vec![0.0; d];
            row0[0] = 0.0 + rng.gen::<f64>() * 0.3;
            row1[0] = 1.0 + rng.gen::<f64>() * 0.3;
            for f in 1..d {
                row0[f] = rng.gen();
                row1[f] = rng.gen();
            }
            data.push_raw(row0, Mechanism::Sm, (2 * i) as u64);
            data.push_raw(row1, Mechanism::Cx, (2 * i + 1) as u64);
        }
        data
    }

    #[test]
    fn separable_toy_reaches_perfect_accuracy() {
        let data = separable_toy(120, 3);
        let train_idx: Vec<usize> = (0..160).collect();
        let test_idx: Vec<usize> = (160..240).collect();
        let model = train(&data.select(&train_idx), &ForestConfig::new(7).with_trees(30)).unwrap();
        let (cm, acc) = evaluate(&model, &data.select(&test_idx)).unwrap();
        assert_eq!(acc, 1.0);
        assert_eq!(cm.counts[Mechanism::Sm.index()][Mechanism::Cx.index()], 0);
        assert_eq!(cm.accuracy(), 1.0);
    }

    #[test]
    fn training_is_deterministic_for_fixed_seed() {
        let data = separable_toy(60, 4);
        let cfg = ForestConfig::new(99).with_trees(20);
        let a = train(&data, &cfg).unwrap();
        let b = train(&data, &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        // byte-identical predictions on arbitrary inputs
        let probe = vec![0.37, 0.9, 0.1, 0.5];
        assert_eq!(predict(&a, &probe).unwrap(), predict(&b, &probe).unwrap());
    }

    #[test]
    fn single_class_data_degenerates_to_constant_predictor() {
        let mut data = Dataset::of_ego_features();
        let fv = FeatureVector::from_array([1.0f64, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, -1.0]);
        for i in 0..40 {
            data.push(&fv, Mechanism::St, i);
        }
        let model = train(&data, &ForestConfig::new(3).with_trees(10)).unwrap();
        let p = predict(&model, &fv.as_array()).unwrap();
        assert_eq!(p.label, Mechanism::St);
        assert_eq!(p.certainty, 1.0);
    }

    #[test]
    fn vote_shares_come_from_tree_counts() {
        // hand-built ensemble: 50 trees vote Sm, 49 Cx, 1 St
        let mut trees = Vec::new();
        let leaf = |m: Mechanism| {
            let mut counts = [0u32; 3];
            counts[m.index()] = 5;
            Tree {
                nodes: vec![TreeNode::Leaf { counts }],
            }
        };
        for _ in 0..50 {
            trees.push(leaf(Mechanism::Sm));
        }
        for _ in 0..49 {
            trees.push(leaf(Mechanism::Cx));
        }
        trees.push(leaf(Mechanism::St));
        let model = ForestModel::<f64> {
            version: MODEL_VERSION,
            feature_names: vec!["x".into()],
            criterion: Criterion::Gini,
            features_per_split: 1,
            feature_subset: vec![0],
            seed: 0,
            trees,
            train_row_ids: vec![],
        };
        let p = predict(&model, &[0.0]).unwrap();
        assert_eq!(p.label, Mechanism::Sm);
        assert_eq!(p.certainty, 0.50);
        assert_eq!(p.votes, [0.50, 0.49, 0.01]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let data = separable_toy(20, 2);
        let model = train(&data, &ForestConfig::new(5).with_trees(5)).unwrap();
        assert!(predict(&model, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn evaluate_rejects_overlapping_rows_and_empty_tests() {
        let data = separable_toy(30, 2);
        let model = train(&data, &ForestConfig::new(5).with_trees(5)).unwrap();
        assert!(evaluate(&model, &data).is_err()); // same rows
        let empty = Dataset::<f64>::new(vec!["f0".into(), "f1".into()]);
        assert!(evaluate(&model, &empty).is_err());
    }

    #[test]
    fn importance_concentrates_on_the_informative_feature() {
        let data = separable_toy(150, 4);
        let model = train(&data, &ForestConfig::new(11).with_trees(30)).unwrap();
        let imp = feature_importance(&model);
        assert_eq!(imp[0].0, "f0");
        assert!(imp[0].1 > 0.9, "importance of f0 = {}", imp[0].1);
        let total: f64 = imp.iter().map(|(_, v)| v).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_feature_toy_has_importance_one() {
        let data = separable_toy(50, 1);
        let model = train(&data, &ForestConfig::new(2).with_trees(10)).unwrap();
        let imp = feature_importance(&model);
        assert_eq!(imp[0], ("f0".to_string(), 1.0));
    }

    #[test]
    fn subset_search_finds_the_informative_feature_and_plateaus() {
        let data = separable_toy(120, 4);
        let protocol = SubsetProtocol {
            train_fraction: 0.7,
            forest: ForestConfig::new(5).with_trees(15).with_criterion(Criterion::Gini),
            seed: 21,
        };
        let reports = best_subset_search(&data, 3, &protocol).unwrap();
        assert_eq!(reports.len(), 3);
        assert_eq!(reports[0].k, 1);
        assert_eq!(reports[0].best_subsets, vec![vec![0]]);
        assert_eq!(reports[0].best_accuracy, 1.0);
        for r in &reports {
            assert!(r.best_accuracy >= reports[0].best_accuracy - 1e-12);
            assert!(r.best_subsets.iter().all(|s| s.contains(&0)));
        }
    }

    #[test]
    fn model_json_round_trips(){
        let data = separable_toy(40, 3);
        let model = train(&data, &ForestConfig::new(17).with_trees(8)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("forest.json");
        save_model(&model, &path).unwrap();
        let back: ForestModel<f64> = load_model(&path).unwrap();
        assert_eq!(
            serde_json::to_string(&model).unwrap(),
            serde_json::to_string(&back).unwrap()
        );
    }

    #[test]
    fn combinations_enumerate_exhaustively() {
        assert_eq!(combinations(8, 1).len(), 8);
        assert_eq!(combinations(8, 4).len(), 70);
        assert_eq!(combinations(8, 8).len(), 1);
        let total: usize = (1..=8).map(|k| combinations(8, k).len()).sum();
        assert_eq!(total, 255);
    }
}
