//! Random forest, SAMME AdaBoost with stumps, and gradient-boosted trees on
//! log-loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logreg::sigmoid;
use super::tree::{fit_classifier, fit_regressor, Node, TreeOptions};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: Some(8), min_leaf: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Fraction of features tried at each split; `None` means `sqrt(d) / d`.
    pub feature_fraction: Option<f64>,
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, feature_fraction: None, bootstrap: true, max_depth: None, min_leaf: 1 }
    }
}

impl ForestParams {
    pub fn features_per_split(&self, d: usize) -> usize {
        let m = match self.feature_fraction {
            Some(f) => (f * d as f64).round(),
            None => (d as f64).sqrt().round(),
        };
        (m as usize).clamp(1, d.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaboostParams {
    pub n_rounds: usize,
}

impl Default for AdaboostParams {
    fn default() -> Self {
        AdaboostParams { n_rounds: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams { n_rounds: 100, learning_rate: 0.1, max_depth: 3, min_leaf: 1 }
    }
}

pub fn fit_tree(x: &FeatureMatrix, p: &TreeParams) -> Node {
    let idx: Vec<usize> = (0..x.rows()).collect();
    let w = vec![1.0; x.rows()];
    let opts = TreeOptions { max_depth: p.max_depth, min_leaf: p.min_leaf, features_per_split: None };
    // no feature subsampling, so the generator is never drawn from
    fit_classifier(x, &idx, &w, &opts, &mut ChaCha8Rng::seed_from_u64(0))
}

/// Trees are grown in parallel; tree `t` draws from stream `t` of a
/// generator seeded with `seed`, so results do not depend on thread count.
pub fn fit_forest(x: &FeatureMatrix, p: &ForestParams, seed: u64) -> Vec<Node> {
    let n = x.rows();
    let w = vec![1.0; n];
    let opts = TreeOptions {
        max_depth: p.max_depth,
        min_leaf: p.min_leaf,
        features_per_split: Some(p.features_per_split(x.cols())),
    };
    (0..p.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let idx: Vec<usize> = if p.bootstrap {
                let mut b: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                b.sort_unstable();
                b
            } else {
                (0..n).collect()
            };
            fit_classifier(x, &idx, &w, &opts, &mut rng)
        })
        .collect()
}

pub fn forest_proba(trees: &[Node], row: &[f64]) -> f64 {
    trees.iter().map(|t| t.predict(row)).sum::<f64>() / trees.len() as f64
}

/// Smallest weighted error used when computing a stump's weight.
pub const MIN_STUMP_ERROR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaboostModel {
    pub stumps: Vec<Node>,
    pub alphas: Vec<f64>,
    /// Score used when no stump beat chance in the first round.
    pub prior: f64,
}

#[derive(Debug, Clone)]
pub struct SammeFit {
    pub model: AdaboostModel,
    /// Sum of the sample weights after each round's normalisation.
    pub weight_sums: Vec<f64>,
}

fn stump_says_one(stump: &Node, row: &[f64]) -> bool {
    stump.predict(row) >= 0.5
}

pub fn fit_samme(x: &FeatureMatrix, n_rounds: usize) -> SammeFit {
    let n = x.rows();
    let labels = x.labels();
    let idx: Vec<usize> = (0..n).collect();
    let mut w = vec![1.0 / n as f64; n];
    let opts = TreeOptions { max_depth: Some(1), min_leaf: 1, features_per_split: None };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let prior = labels.iter().filter(|&&l| l == 1).count() as f64 / n as f64;
    let mut model = AdaboostModel { stumps: Vec::new(), alphas: Vec::new(), prior };
    let mut weight_sums = Vec::new();
    for _ in 0..n_rounds {
        let stump = fit_classifier(x, &idx, &w, &opts, &mut rng);
        let miss: Vec<bool> = (0..n).map(|i| stump_says_one(&stump, x.row(i)) != (labels[i] == 1)).collect();
        let err: f64 = miss.iter().zip(&w).filter(|(m, _)| **m).map(|(_, wi)| wi).sum();
        if err >= 0.5 {
            break;
        }
        let alpha = ((1.0 - err.max(MIN_STUMP_ERROR)) / err.max(MIN_STUMP_ERROR)).ln();
        model.stumps.push(stump);
        model.alphas.push(alpha);
        if err <= MIN_STUMP_ERROR {
            break;
        }
        let boost = alpha.exp();
        for (wi, &m) in w.iter_mut().zip(&miss) {
            if m {
                *wi *= boost;
            }
        }
        let total: f64 = w.iter().sum();
        for wi in &mut w {
            *wi /= total;
        }
        weight_sums.push(w.iter().sum());
    }
    SammeFit { model, weight_sums }
}

impl AdaboostModel {
    /// Share of the total stump weight voting for class 1.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let total: f64 = self.alphas.iter().sum();
        if self.stumps.is_empty() || total <= 0.0 {
            return self.prior;
        }
        let pos: f64 = self
            .stumps
            .iter()
            .zip(&self.alphas)
            .filter(|(s, _)| stump_says_one(s, row))
            .map(|(_, a)| a)
            .sum();
        pos / total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_score: f64,
    /// Trees with shrinkage already folded into the leaves.
    pub trees: Vec<Node>,
}

impl GbtModel {
    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }
}

fn mean_log_loss(f: &[f64], y: &[f64]) -> f64 {
    f.iter()
        .zip(y)
        .map(|(&z, &y)| {
            let sp = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            sp - y * z
        })
        .sum::<f64>()
        / f.len() as f64
}

/// Each round fits a regression tree to the residuals `y - p` and sets
/// leaves to the Newton step `sum(r) / sum(p(1-p))`. The step is halved
/// until the training loss does not increase; a round that cannot reduce
/// the loss ends training. Returns the model and the loss after each round
/// (entry 0 is the loss of the base score).
pub fn fit_gbt(x: &FeatureMatrix, p: &GbtParams) -> (GbtModel, Vec<f64>) {
    let n = x.rows();
    let y: Vec<f64> = x.labels().iter().map(|&l| f64::from(l)).collect();
    let rate = y.iter().sum::<f64>() / n as f64;
    let base_score = (rate / (1.0 - rate)).ln();
    let mut f = vec![base_score; n];
    let mut loss = mean_log_loss(&f, &y);
    let mut trace = vec![loss];
    let mut trees = Vec::new();
    let opts = TreeOptions { max_depth: Some(p.max_depth), min_leaf: p.min_leaf, features_per_split: None };
    for _ in 0..p.n_rounds {
        let prob: Vec<f64> = f.iter().map(|&z| sigmoid(z)).collect();
        let resid: Vec<f64> = y.iter().zip(&prob).map(|(y, p)| y - p).collect();
        let newton = |idx: &[usize]| {
            let num: f64 = idx.iter().map(|&i| resid[i]).sum();
            let den: f64 = idx.iter().map(|&i| prob[i] * (1.0 - prob[i])).sum();
            num / den.max(1e-12)
        };
        let mut tree = fit_regressor(x, &resid, &opts, &newton);
        let step_of: Vec<f64> = (0..n).map(|i| tree.predict(x.row(i))).collect();
        let mut shrink = p.learning_rate;
        let mut accepted = None;
        for _ in 0..50 {
            let cand: Vec<f64> = f.iter().zip(&step_of).map(|(a, s)| a + shrink * s).collect();
            let cand_loss = mean_log_loss(&cand, &y);
            if cand_loss <= loss {
                accepted = Some((cand, cand_loss));
                break;
            }
            shrink /= 2.0;
        }
        let Some((cand, cand_loss)) = accepted else {
            break;
        };
        tree.scale_leaves(shrink);
        trees.push(tree);
        f = cand;
        let improved = cand_loss < loss;
        loss = cand_loss;
        trace.push(loss);
        if !improved {
            break;
        }
    }
    (GbtModel { base_score, trees }, trace)
}
