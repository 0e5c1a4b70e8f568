use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::matrix::FeatureMatrix;

/// Fitted principal component projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// k x d, row-major; rows are orthonormal.
    pub components: Vec<Vec<f64>>,
    /// Variance share of each kept component, over all singular values.
    pub explained_variance_ratio: Vec<f64>,
    /// Variance share of every component the data supports (min(n, d) entries).
    pub spectrum_ratio: Vec<f64>,
    pub singular_values: Vec<f64>,
    pub numerical_rank: usize,
    /// More components were requested than the numerical rank supports.
    pub rank_deficient: bool,
}

/// Top-`k` right singular vectors of the column-centered matrix. Each
/// component is signed so its largest-magnitude entry is positive.
pub fn pca_fit(x: &FeatureMatrix, k: usize) -> Result<PcaModel> {
    let (n, d) = (x.rows(), x.cols());
    if n < 2 || k == 0 || k > (n - 1).min(d) {
        return Err(PipelineError::BadComponentCount { k, rows: n, cols: d });
    }
    let mut m = DMatrix::from_row_slice(n, d, x.data());
    let mut mean = Vec::with_capacity(d);
    for mut col in m.column_iter_mut() {
        let mu = col.sum() / n as f64;
        col.add_scalar_mut(-mu);
        mean.push(mu);
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| PipelineError::Numeric("SVD did not return V".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let total: f64 = sigma.iter().map(|s| s * s).sum();
    let spectrum_ratio: Vec<f64> = sigma
        .iter()
        .map(|s| if total > 0.0 { s * s / total } else { 0.0 })
        .collect();
    let tol = sigma.first().copied().unwrap_or(0.0) * (n.max(d) as f64) * f64::EPSILON;
    let numerical_rank = sigma.iter().filter(|&&s| s > tol).count();

    let components = order[..k]
        .iter()
        .map(|&i| {
            let mut row: Vec<f64> = v_t.row(i).iter().copied().collect();
            let mut lead = 0;
            for (j, v) in row.iter().enumerate() {
                if v.abs() > row[lead].abs() {
                    lead = j;
                }
            }
            if row[lead] < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
            }
            row
        })
        .collect();

    Ok(PcaModel {
        mean,
        components,
        explained_variance_ratio: spectrum_ratio[..k].to_vec(),
        spectrum_ratio,
        singular_values: sigma,
        numerical_rank,
        rank_deficient: k > numerical_rank,
    })
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// Keeps only the first `k` components.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.n_components());
        Self {
            components: self.components[..k].to_vec(),
            explained_variance_ratio: self.explained_variance_ratio[..k].to_vec(),
            rank_deficient: k > self.numerical_rank,
            ..self.clone()
        }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(row).zip(&self.mean).map(|((w, v), m)| w * (v - m)).sum())
            .collect()
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.cols() != self.mean.len() {
            return Err(PipelineError::LengthMismatch(x.cols(), self.mean.len()));
        }
        let data = x.row_iter().flat_map(|r| self.transform_row(r)).collect();
        let names = (1..=self.n_components()).map(|i| format!("pc{i}")).collect();
        Ok(x.with_data(self.n_components(), data, names)?)
    }

    pub fn inverse_transform_row(&self, scores: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, s) in self.components.iter().zip(scores) {
            for (o, w) in out.iter_mut().zip(c) {
                *o += s * w;
            }
        }
        out
    }
}

/// Index of maximum perpendicular distance from the cumulative explained
/// variance curve to its chord. Ties go to the smaller index.
pub fn find_elbow(ratios: &[f64]) -> Result<usize> {
    let n = ratios.len();
    if n < 3 {
        return Err(PipelineError::TooFewComponents(n));
    }
    if ratios.windows(2).any(|w| w[1] > w[0] + 1e-9) {
        return Err(PipelineError::NotNonincreasing);
    }
    let cumulative: Vec<f64> = ratios
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r;
            Some(*acc)
        })
        .collect();
    let (x0, y0) = (0.0, cumulative[0]);
    let (x1, y1) = ((n - 1) as f64, cumulative[n - 1]);
    let (dx, dy) = (x1 - x0, y1 - y0);
    let len = (dx * dx + dy * dy).sqrt();
    let mut best = 0;
    let mut best_dist = 0.0;
    for (i, &y) in cumulative.iter().enumerate() {
        let dist = (dy * (i as f64 - x0) - dx * (y - y0)).abs() / len;
        if dist > best_dist + 1e-12 {
            best = i;
            best_dist = dist;
        }
    }
    Ok(best)
}
