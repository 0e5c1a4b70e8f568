use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::matrix::FeatureMatrix;

/// R^2 is capped at `1 - R2_CAP` so VIF stays finite; columns that hit the
/// cap are flagged as singular.
pub const R2_CAP: f64 = 1e-12;

/// Sample Pearson correlation.
pub fn pearson_corr(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(PipelineError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(PipelineError::TooFewRows(a.len()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(PipelineError::ZeroVariance);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifEntry {
    pub column: String,
    pub vif: f64,
    /// R^2 reached the cap: the column is (numerically) a linear
    /// combination of the others.
    pub singular: bool,
}

fn centered(x: &FeatureMatrix) -> DMatrix<f64> {
    let n = x.rows();
    let mut m = DMatrix::from_row_slice(n, x.cols(), x.data());
    for mut col in m.column_iter_mut() {
        let mean = col.sum() / n as f64;
        col.add_scalar_mut(-mean);
    }
    m
}

/// Variance inflation factor of every column: `1 / (1 - R^2)` from an
/// intercept regression of that column on all the others.
pub fn compute_vif(x: &FeatureMatrix) -> Result<Vec<VifEntry>> {
    let d = x.cols();
    if d < 2 {
        return Err(PipelineError::TooFewColumns(d));
    }
    if x.rows() < 2 {
        return Err(PipelineError::TooFewRows(x.rows()));
    }
    let m = centered(x);
    (0..d)
        .map(|j| {
            let y: DVector<f64> = m.column(j).into_owned();
            let raw_col = x.column(j);
            if raw_col.iter().all(|&v| v == raw_col[0]) {
                return Err(PipelineError::ConstantColumn(x.names()[j].clone()));
            }
            let tss = y.norm_squared();
            let others = m.clone().remove_column(j);
            let svd = others.clone().svd(true, true);
            let tol = svd.singular_values.max() * (x.rows().max(d) as f64) * f64::EPSILON;
            let beta = svd.solve(&y, tol).map_err(|e| PipelineError::Numeric(e.to_string()))?;
            let rss = (&y - &others * beta).norm_squared();
            let raw = 1.0 - rss / tss;
            let singular = raw >= 1.0 - R2_CAP;
            let r2 = raw.clamp(0.0, 1.0 - R2_CAP);
            Ok(VifEntry {
                column: x.names()[j].clone(),
                vif: 1.0 / (1.0 - r2),
                singular,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifRound {
    pub entries: Vec<VifEntry>,
    pub dropped: Option<String>,
}

/// Drops the highest-VIF column above `threshold` and recomputes until every
/// VIF is at or below it. Ties go to the earlier column.
pub fn iterative_vif_prune(x: &FeatureMatrix, threshold: f64) -> Result<(FeatureMatrix, Vec<VifRound>)> {
    if threshold.is_nan() || threshold <= 1.0 {
        return Err(PipelineError::BadThreshold(threshold));
    }
    let mut current = x.clone();
    let mut rounds = Vec::new();
    loop {
        if current.cols() < 2 {
            break;
        }
        let entries = compute_vif(&current)?;
        let mut worst: Option<usize> = None;
        for (j, e) in entries.iter().enumerate() {
            if e.vif > threshold && worst.is_none_or(|w| e.vif > entries[w].vif) {
                worst = Some(j);
            }
        }
        match worst {
            Some(j) => {
                rounds.push(VifRound {
                    dropped: Some(entries[j].column.clone()),
                    entries,
                });
                current = current.drop_column(j);
            }
            None => {
                rounds.push(VifRound { entries, dropped: None });
                break;
            }
        }
    }
    Ok((current, rounds))
}
