//! Tabular preprocessing for the churn benchmark: load, drop correlated and
//! multicollinear columns, one-hot encode, balance classes, split, then
//! standardize and project onto principal components.
//!
//! The stratified split is drawn right after undersampling so the
//! standardizer and PCA only ever see training rows.

mod dataset;
mod pca;
mod sampling;
mod stats;

pub use dataset::{load_csv, read_csv, Column, ColumnData, ColumnKind, ColumnSpec, Dataset, Schema};
pub use pca::{find_elbow, pca_fit, PcaModel};
pub use sampling::{train_test_split, undersample_indices, SplitIndices};
pub use stats::{compute_vif, iterative_vif_prune, pearson_corr, VifEntry, VifRound, R2_CAP};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{FeatureMatrix, MatrixError};
use crate::scale::StandardScaler;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("csv: {0}")]
    Csv(String),
    #[error("file has no header or no data rows")]
    EmptyFile,
    #[error("missing column {0}")]
    MissingColumn(String),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("column {0} is not categorical")]
    NotCategorical(String),
    #[error("row {row}, column {column}: cannot parse {value:?}")]
    UnparsableCell { row: usize, column: String, value: String },
    #[error("bad schema: {0}")]
    BadSchema(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("need at least 2 columns, got {0}")]
    TooFewColumns(usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("column {0} is constant")]
    ConstantColumn(String),
    #[error("threshold {0} out of range")]
    BadThreshold(f64),
    #[error("ratio {0} not in (0, 1)")]
    BadRatio(f64),
    #[error("{k} components requested for a {rows}x{cols} matrix")]
    BadComponentCount { k: usize, rows: usize, cols: usize },
    #[error("need at least 3 ratios for an elbow, got {0}")]
    TooFewComponents(usize),
    #[error("explained variance ratios must be nonincreasing")]
    NotNonincreasing,
    #[error("only one class present")]
    SingleClass,
    #[error("class {class} has {count} rows; need at least 2")]
    ClassTooSmall { class: u8, count: usize },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Number of principal components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Components {
    Fixed(usize),
    Auto(AutoComponents),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoComponents {
    Elbow,
}

impl Default for Components {
    fn default() -> Self {
        Components::Auto(AutoComponents::Elbow)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub correlation_threshold: f64,
    pub vif_threshold: f64,
    /// Columns dropped after the VIF loop settles, by name.
    pub vif_recheck_drop: Vec<String>,
    pub standardize: bool,
    pub undersample: bool,
    pub undersample_seed: u64,
    pub components: Components,
    pub split_ratio: f64,
    pub split_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            correlation_threshold: 0.8,
            vif_threshold: 12.0,
            vif_recheck_drop: Vec::new(),
            standardize: true,
            undersample: true,
            undersample_seed: 42,
            components: Components::default(),
            split_ratio: 0.8,
            split_seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropRule {
    /// Identifier column; statistic is the fraction of distinct values.
    Id,
    /// |Pearson r| above threshold; statistic is r.
    Correlation,
    /// VIF above threshold in the elimination loop; statistic is the VIF.
    Vif,
    /// Listed for removal after the VIF recheck; statistic is its VIF then.
    VifRecheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub column: String,
    pub rule: DropRule,
    pub statistic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub rows_loaded: usize,
    pub blank_numeric_cells: Vec<(String, usize)>,
    pub dropped: Vec<DroppedColumn>,
    pub vif_rounds: Vec<VifRound>,
    pub one_hot_columns: usize,
    pub class_counts_before: [usize; 2],
    pub class_counts_after: [usize; 2],
    pub split_train_rows: usize,
    pub split_test_rows: usize,
    pub split_checksum: String,
    pub explained_variance_ratio: Vec<f64>,
    pub elbow_index: Option<usize>,
    pub cumulative_at_elbow: Option<f64>,
    pub components_kept: usize,
    pub rank_deficient: bool,
    pub notes: Vec<String>,
}

/// Output of [`prepare`]: projected train/test matrices and everything
/// needed to reproduce them.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    /// One-hot matrix after undersampling, before the split.
    pub encoded: FeatureMatrix,
    pub split: SplitIndices,
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    pub pca: PcaModel,
    pub report: PreprocessReport,
}

fn distinct_fraction(col: &Column) -> f64 {
    let mut values: Vec<&String> = col.text().map(|t| t.iter().collect()).unwrap_or_default();
    let n = values.len().max(1);
    values.sort_unstable();
    values.dedup();
    values.len() as f64 / n as f64
}

/// Drops the later column of every numeric pair with |r| above `threshold`.
pub fn drop_correlated(dataset: &Dataset, threshold: f64) -> Result<(Dataset, Vec<DroppedColumn>)> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(PipelineError::BadThreshold(threshold));
    }
    let numeric: Vec<&Column> = dataset.columns.iter().filter(|c| c.kind == ColumnKind::Numeric).collect();
    let mut dropped: Vec<DroppedColumn> = Vec::new();
    for (i, a) in numeric.iter().enumerate() {
        if dropped.iter().any(|d| d.column == a.name) {
            continue;
        }
        for b in &numeric[i + 1..] {
            if dropped.iter().any(|d| d.column == b.name) {
                continue;
            }
            let r = match pearson_corr(a.numeric().unwrap_or_default(), b.numeric().unwrap_or_default()) {
                Ok(r) => r,
                Err(PipelineError::ZeroVariance) => continue,
                Err(e) => return Err(e),
            };
            if r.abs() > threshold {
                dropped.push(DroppedColumn {
                    column: b.name.clone(),
                    rule: DropRule::Correlation,
                    statistic: r,
                    partner: Some(a.name.clone()),
                });
            }
        }
    }
    let mut out = dataset.clone();
    out.columns.retain(|c| !dropped.iter().any(|d| d.column == c.name));
    Ok((out, dropped))
}

/// Runs the full preprocessing chain.
pub fn prepare(dataset: &Dataset, cfg: &PipelineConfig) -> Result<Prepared> {
    let mut report = PreprocessReport {
        rows_loaded: dataset.rows,
        blank_numeric_cells: dataset.blank_numeric.clone(),
        ..Default::default()
    };
    if !dataset.blank_numeric.is_empty() {
        report.notes.push("blank numeric cells were read as 0".into());
    }

    let mut data = dataset.clone();
    for col in dataset.columns.iter().filter(|c| c.kind == ColumnKind::Id) {
        report.dropped.push(DroppedColumn {
            column: col.name.clone(),
            rule: DropRule::Id,
            statistic: distinct_fraction(col),
            partner: None,
        });
        data = data.without_column(&col.name);
    }

    let (mut data, corr_dropped) = drop_correlated(&data, cfg.correlation_threshold)?;
    report.dropped.extend(corr_dropped);

    let numeric = data.numeric_encode()?;
    let (_, rounds) = iterative_vif_prune(&numeric, cfg.vif_threshold)?;
    for round in &rounds {
        if let Some(name) = &round.dropped {
            let vif = round.entries.iter().find(|e| &e.column == name).map_or(f64::NAN, |e| e.vif);
            report.dropped.push(DroppedColumn {
                column: name.clone(),
                rule: DropRule::Vif,
                statistic: vif,
                partner: None,
            });
            data = data.without_column(name);
        }
    }
    let settled = rounds.last().map(|r| r.entries.clone()).unwrap_or_default();
    report.vif_rounds = rounds;
    for name in &cfg.vif_recheck_drop {
        if report.dropped.iter().any(|d| &d.column == name) {
            report.notes.push(format!("{name} listed for recheck drop but already removed"));
            continue;
        }
        let entry = settled
            .iter()
            .find(|e| &e.column == name)
            .ok_or_else(|| PipelineError::UnknownColumn(name.clone()))?;
        report.dropped.push(DroppedColumn {
            column: name.clone(),
            rule: DropRule::VifRecheck,
            statistic: entry.vif,
            partner: None,
        });
        data = data.without_column(name);
    }

    let encoded = data.one_hot(&data.categorical_names())?;
    report.one_hot_columns = encoded.cols();
    report.class_counts_before = encoded.class_counts();

    let encoded = if cfg.undersample {
        let idx = undersample_indices(encoded.labels(), cfg.undersample_seed)?;
        encoded.select_rows(&idx)
    } else {
        encoded
    };
    report.class_counts_after = encoded.class_counts();

    let split = train_test_split(encoded.labels(), cfg.split_ratio, cfg.split_seed)?;
    report.split_train_rows = split.train.len();
    report.split_test_rows = split.test.len();
    report.split_checksum = split.checksum();
    report.notes.push(
        "undersampling precedes the split; standardization and PCA are fitted on the training split".into(),
    );

    let mut train = encoded.select_rows(&split.train);
    let mut test = encoded.select_rows(&split.test);
    if cfg.standardize {
        let scaler = StandardScaler::fit(&train);
        train = scaler.transform(&train);
        test = scaler.transform(&test);
    }

    let max_k = (train.rows() - 1).min(train.cols());
    let full = pca_fit(&train, max_k)?;
    report.explained_variance_ratio = full.spectrum_ratio.clone();
    let k = match cfg.components {
        Components::Fixed(k) => k,
        Components::Auto(AutoComponents::Elbow) => {
            let elbow = find_elbow(&full.spectrum_ratio)?;
            report.elbow_index = Some(elbow);
            report.cumulative_at_elbow = Some(full.spectrum_ratio[..=elbow].iter().sum());
            elbow.max(1)
        }
    };
    if k == 0 || k > max_k {
        return Err(PipelineError::BadComponentCount { k, rows: train.rows(), cols: train.cols() });
    }
    let pca = full.truncated(k);
    report.components_kept = k;
    report.rank_deficient = pca.rank_deficient;

    let train = pca.transform(&train)?;
    let test = pca.transform(&test)?;
    Ok(Prepared { encoded, split, train, test, pca, report })
}
