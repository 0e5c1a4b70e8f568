//! Classical classifiers. Every model produces `P(class = 1)` per row.

pub mod ensemble;
pub mod kernel;
pub mod knn;
pub mod logreg;
pub mod svm;
pub mod tree;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::FeatureMatrix;
pub use ensemble::{AdaboostModel, AdaboostParams, ForestParams, GbtModel, GbtParams, TreeParams};
pub use kernel::{kernel_eval, KernelFn, KernelSpec};
pub use knn::{KnnModel, KnnParams};
pub use logreg::{LogregModel, LogregParams};
pub use svm::{SvmModel, SvmParams};
pub use tree::Node;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("training labels contain only class {0}")]
    SingleClass(u8),
    #[error("class {class} has {count} training rows, need at least 2")]
    TooFewPerClass { class: u8, count: usize },
    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Logreg(LogregParams),
    Knn(KnnParams),
    Svm(SvmParams),
    Tree(TreeParams),
    Forest(ForestParams),
    Adaboost(AdaboostParams),
    Gbt(GbtParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    #[serde(default)]
    pub seed: u64,
}

fn bad(msg: String) -> ModelError {
    ModelError::InvalidHyperparameter(msg)
}

fn check_depth(d: Option<usize>) -> Result<()> {
    match d {
        Some(0) => Err(bad("max_depth must be >= 1".into())),
        _ => Ok(()),
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be > 0, got {v}")))
    }
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        ModelSpec { kind, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Label used in reports.
    pub fn name(&self) -> String {
        match &self.kind {
            ModelKind::Logreg(_) => "logreg".into(),
            ModelKind::Knn(_) => "knn".into(),
            ModelKind::Svm(p) => format!("svm_{}", p.kernel.name()),
            ModelKind::Tree(_) => "tree".into(),
            ModelKind::Forest(_) => "forest".into(),
            ModelKind::Adaboost(_) => "adaboost".into(),
            ModelKind::Gbt(_) => "gbt (stands in for LightGBM/CatBoost)".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ModelKind::Logreg(p) => {
                check_positive("learning_rate", p.learning_rate)?;
                check_positive("tol", p.tol)?;
                if !(p.l2 >= 0.0 && p.l2.is_finite()) {
                    return Err(bad(format!("l2 must be >= 0, got {}", p.l2)));
                }
            }
            ModelKind::Knn(p) => {
                if p.k == 0 {
                    return Err(bad("k must be >= 1".into()));
                }
            }
            ModelKind::Svm(p) => {
                check_positive("C", p.c)?;
                check_positive("tol", p.tol)?;
                p.kernel.resolve(1)?;
            }
            ModelKind::Tree(p) => {
                check_depth(p.max_depth)?;
                if p.min_leaf == 0 {
                    return Err(bad("min_leaf must be >= 1".into()));
                }
            }
            ModelKind::Forest(p) => {
                if p.n_trees == 0 {
                    return Err(bad("n_trees must be >= 1".into()));
                }
                if let Some(f) = p.feature_fraction {
                    if !(f > 0.0 && f <= 1.0) {
                        return Err(bad(format!("feature_fraction must be in (0, 1], got {f}")));
                    }
                }
                check_depth(p.max_depth)?;
                if p.min_leaf == 0 {
                    return Err(bad("min_leaf must be >= 1".into()));
                }
            }
            ModelKind::Adaboost(p) => {
                if p.n_rounds == 0 {
                    return Err(bad("n_rounds must be >= 1".into()));
                }
            }
            ModelKind::Gbt(p) => {
                if p.n_rounds == 0 || p.max_depth == 0 || p.min_leaf == 0 {
                    return Err(bad("n_rounds, max_depth and min_leaf must be >= 1".into()));
                }
                check_positive("learning_rate", p.learning_rate)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedParams {
    Logreg(LogregModel),
    Knn(KnnModel),
    Svm(SvmModel),
    Tree { root: Node },
    Forest { trees: Vec<Node> },
    Adaboost(AdaboostModel),
    Gbt(GbtModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub n_features: usize,
    pub iterations: usize,
    pub converged: bool,
    pub fit_ms: f64,
    /// Per-round training loss (gbt) or weight sums (adaboost).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub params: FittedParams,
    pub meta: TrainingMeta,
}

fn check_training_data(x: &FeatureMatrix) -> Result<()> {
    let [neg, pos] = x.class_counts();
    if pos == 0 || neg == 0 {
        return Err(ModelError::SingleClass(u8::from(pos > 0)));
    }
    for (class, count) in [(0u8, neg), (1u8, pos)] {
        if count < 2 {
            return Err(ModelError::TooFewPerClass { class, count });
        }
    }
    for (row, r) in x.row_iter().enumerate() {
        if let Some(col) = r.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteFeature { row, col });
        }
    }
    Ok(())
}

/// Trains `spec` on `x` (labels are taken from the matrix).
pub fn fit(spec: &ModelSpec, x: &FeatureMatrix) -> Result<TrainedModel> {
    spec.validate()?;
    check_training_data(x)?;
    let start = Instant::now();
    let mut iterations = 0;
    let mut converged = true;
    let mut trace = Vec::new();
    let params = match &spec.kind {
        ModelKind::Logreg(p) => {
            let (m, it, conv) = logreg::fit(x, p);
            iterations = it;
            converged = conv;
            FittedParams::Logreg(m)
        }
        ModelKind::Knn(p) => FittedParams::Knn(KnnModel { k: p.k, train: x.clone() }),
        ModelKind::Svm(p) => {
            let kernel = p.kernel.resolve(x.cols())?;
            let (m, it, conv) = svm::fit(x, p, kernel);
            iterations = it;
            converged = conv;
            FittedParams::Svm(m)
        }
        ModelKind::Tree(p) => FittedParams::Tree { root: ensemble::fit_tree(x, p) },
        ModelKind::Forest(p) => {
            let trees = ensemble::fit_forest(x, p, spec.seed);
            iterations = trees.len();
            FittedParams::Forest { trees }
        }
        ModelKind::Adaboost(p) => {
            let fit = ensemble::fit_samme(x, p.n_rounds);
            iterations = fit.model.stumps.len();
            trace = fit.weight_sums;
            FittedParams::Adaboost(fit.model)
        }
        ModelKind::Gbt(p) => {
            let (m, losses) = ensemble::fit_gbt(x, p);
            iterations = m.trees.len();
            trace = losses;
            FittedParams::Gbt(m)
        }
    };
    let fit_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(TrainedModel {
        spec: spec.clone(),
        params,
        meta: TrainingMeta { n_features: x.cols(), iterations, converged, fit_ms, trace },
    })
}

impl TrainedModel {
    fn proba_row(&self, row: &[f64]) -> f64 {
        let p = match &self.params {
            FittedParams::Logreg(m) => m.predict_proba(row),
            FittedParams::Knn(m) => m.predict_proba(row),
            FittedParams::Svm(m) => m.predict_proba(row),
            FittedParams::Tree { root } => root.predict(row),
            FittedParams::Forest { trees } => ensemble::forest_proba(trees, row),
            FittedParams::Adaboost(m) => m.predict_proba(row),
            FittedParams::Gbt(m) => m.predict_proba(row),
        };
        p.clamp(0.0, 1.0)
    }

    /// `P(class = 1)` for every row of `x`.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.cols() != self.meta.n_features {
            return Err(ModelError::DimensionMismatch { expected: self.meta.n_features, got: x.cols() });
        }
        Ok((0..x.rows()).into_par_iter().map(|i| self.proba_row(x.row(i))).collect())
    }

    /// `[P(class = 0), P(class = 1)]` per row.
    pub fn predict_class_proba(&self, x: &FeatureMatrix) -> Result<Vec<[f64; 2]>> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| [1.0 - p, p]).collect())
    }
}
