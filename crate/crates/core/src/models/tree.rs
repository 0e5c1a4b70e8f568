//! CART trees. Classification trees split on weighted Gini impurity;
//! regression trees split on squared error. Thresholds are midpoints between
//! consecutive distinct values, and rows with `x[feature] <= threshold` go
//! left. Split ties go to the lower feature index, then the lower threshold.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { value, .. } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub(crate) fn scale_leaves(&mut self, factor: f64) {
        match self {
            Node::Leaf { value, .. } => *value *= factor,
            Node::Split { left, right, .. } => {
                left.scale_leaves(factor);
                right.scale_leaves(factor);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeOptions {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features examined per split; `None` means all.
    pub features_per_split: Option<usize>,
}

/// Split statistics with the "sum of child scores" form: the gain of a
/// split is `score(left) + score(right) - score(parent)`.
trait Stats: Clone {
    fn add(&mut self, i: usize);
    fn remove(&mut self, i: usize);
    fn score(&self) -> f64;
    fn count(&self) -> usize;
}

#[derive(Clone)]
struct GiniStats<'a> {
    labels: &'a [u8],
    weights: &'a [f64],
    w: [f64; 2],
    n: usize,
}

impl Stats for GiniStats<'_> {
    fn add(&mut self, i: usize) {
        self.w[usize::from(self.labels[i])] += self.weights[i];
        self.n += 1;
    }
    fn remove(&mut self, i: usize) {
        self.w[usize::from(self.labels[i])] -= self.weights[i];
        self.n -= 1;
    }
    /// `W - W * gini = (w0^2 + w1^2) / W`.
    fn score(&self) -> f64 {
        let total = self.w[0] + self.w[1];
        if total <= 0.0 {
            0.0
        } else {
            (self.w[0] * self.w[0] + self.w[1] * self.w[1]) / total
        }
    }
    fn count(&self) -> usize {
        self.n
    }
}

#[derive(Clone)]
struct SseStats<'a> {
    targets: &'a [f64],
    sum: f64,
    n: usize,
}

impl Stats for SseStats<'_> {
    fn add(&mut self, i: usize) {
        self.sum += self.targets[i];
        self.n += 1;
    }
    fn remove(&mut self, i: usize) {
        self.sum -= self.targets[i];
        self.n -= 1;
    }
    /// SSE = sum(t^2) - sum(t)^2 / n; the first term cancels in gains.
    fn score(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum * self.sum / self.n as f64
        }
    }
    fn count(&self) -> usize {
        self.n
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn best_split<S: Stats>(
    x: &FeatureMatrix,
    idx: &[usize],
    features: &[usize],
    parent: &S,
    min_leaf: usize,
) -> Option<BestSplit> {
    let mut best: Option<BestSplit> = None;
    let parent_score = parent.score();
    let mut order: Vec<usize> = idx.to_vec();
    for &f in features {
        order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)).then(a.cmp(&b)));
        let mut left = parent.clone();
        let mut right = parent.clone();
        for &i in &order {
            left.remove(i);
        }
        for k in 0..order.len() - 1 {
            let i = order[k];
            left.add(i);
            right.remove(i);
            let (v, next) = (x.get(i, f), x.get(order[k + 1], f));
            if v == next || left.count() < min_leaf || right.count() < min_leaf {
                continue;
            }
            let gain = left.score() + right.score() - parent_score;
            if best.as_ref().is_none_or(|b| gain > b.gain + 1e-12 * (parent_score.abs() + b.gain.abs())) {
                best = Some(BestSplit { feature: f, threshold: v + (next - v) / 2.0, gain });
            }
        }
    }
    best
}

fn choose_features<R: Rng>(d: usize, per_split: Option<usize>, rng: &mut R) -> Vec<usize> {
    match per_split {
        Some(m) if m < d => {
            let mut f = sample(rng, d, m).into_vec();
            f.sort_unstable();
            f
        }
        _ => (0..d).collect(),
    }
}

fn partition(x: &FeatureMatrix, idx: &[usize], feature: usize, threshold: f64) -> (Vec<usize>, Vec<usize>) {
    idx.iter().partition(|&&i| x.get(i, feature) <= threshold)
}

/// Classification tree; leaves hold the weighted fraction of class 1.
pub fn fit_classifier<R: Rng>(
    x: &FeatureMatrix,
    idx: &[usize],
    weights: &[f64],
    opts: &TreeOptions,
    rng: &mut R,
) -> Node {
    let labels = x.labels();
    grow_classifier(x, labels, idx, weights, opts, 0, rng)
}

fn grow_classifier<R: Rng>(
    x: &FeatureMatrix,
    labels: &[u8],
    idx: &[usize],
    weights: &[f64],
    opts: &TreeOptions,
    depth: usize,
    rng: &mut R,
) -> Node {
    let mut stats = GiniStats { labels, weights, w: [0.0; 2], n: 0 };
    for &i in idx {
        stats.add(i);
    }
    let total = stats.w[0] + stats.w[1];
    let value = if total > 0.0 {
        stats.w[1] / total
    } else {
        idx.iter().filter(|&&i| labels[i] == 1).count() as f64 / idx.len().max(1) as f64
    };
    let leaf = Node::Leaf { value, samples: idx.len() };
    let pure = stats.w[0] <= 0.0 || stats.w[1] <= 0.0;
    if pure || opts.max_depth.is_some_and(|m| depth >= m) || idx.len() < 2 * opts.min_leaf {
        return leaf;
    }
    let features = choose_features(x.cols(), opts.features_per_split, rng);
    // impure nodes split even at zero gain, so distinct rows always separate
    let Some(split) = best_split(x, idx, &features, &stats, opts.min_leaf) else {
        return leaf;
    };
    let (l, r) = partition(x, idx, split.feature, split.threshold);
    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow_classifier(x, labels, &l, weights, opts, depth + 1, rng)),
        right: Box::new(grow_classifier(x, labels, &r, weights, opts, depth + 1, rng)),
    }
}

/// Regression tree on `targets` with squared-error splits. Leaf values come
/// from `leaf_value(rows in leaf)`.
pub fn fit_regressor<F>(x: &FeatureMatrix, targets: &[f64], opts: &TreeOptions, leaf_value: &F) -> Node
where
    F: Fn(&[usize]) -> f64,
{
    let idx: Vec<usize> = (0..x.rows()).collect();
    grow_regressor(x, targets, &idx, opts, 0, leaf_value)
}

fn grow_regressor<F>(
    x: &FeatureMatrix,
    targets: &[f64],
    idx: &[usize],
    opts: &TreeOptions,
    depth: usize,
    leaf_value: &F,
) -> Node
where
    F: Fn(&[usize]) -> f64,
{
    let leaf = Node::Leaf { value: leaf_value(idx), samples: idx.len() };
    if opts.max_depth.is_some_and(|m| depth >= m) || idx.len() < 2 * opts.min_leaf {
        return leaf;
    }
    let mut stats = SseStats { targets, sum: 0.0, n: 0 };
    for &i in idx {
        stats.add(i);
    }
    let features: Vec<usize> = (0..x.cols()).collect();
    match best_split(x, idx, &features, &stats, opts.min_leaf) {
        Some(split) if split.gain > 1e-12 => {
            let (l, r) = partition(x, idx, split.feature, split.threshold);
            Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: Box::new(grow_regressor(x, targets, &l, opts, depth + 1, leaf_value)),
                right: Box::new(grow_regressor(x, targets, &r, opts, depth + 1, leaf_value)),
            }
        }
        _ => leaf,
    }
}
