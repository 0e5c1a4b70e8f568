//! Per-column scalers fitted on a training matrix and applied to any matrix
//! with the same columns.

use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;

/// Maps each column to `[0, 1]` using the training min and max.
///
/// Constant training columns map to 0. With `clip` set, values outside the
/// training range are clamped into `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub clip: bool,
}

impl MinMaxScaler {
    pub fn fit(x: &FeatureMatrix, clip: bool) -> Self {
        let mut min = vec![f64::INFINITY; x.cols()];
        let mut max = vec![f64::NEG_INFINITY; x.cols()];
        for row in x.row_iter() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        if x.rows() == 0 {
            min.fill(0.0);
            max.fill(0.0);
        }
        Self { min, max, clip }
    }

    pub fn scale_value(&self, j: usize, v: f64) -> f64 {
        let span = self.max[j] - self.min[j];
        let s = if span > 0.0 { (v - self.min[j]) / span } else { 0.0 };
        if self.clip {
            s.clamp(0.0, 1.0)
        } else {
            s
        }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, &v)| self.scale_value(j, v)).collect()
    }

    pub fn transform(&self, x: &FeatureMatrix) -> FeatureMatrix {
        let data = x.row_iter().flat_map(|r| self.transform_row(r)).collect();
        x.with_data(x.cols(), data, x.names().to_vec())
            .expect("scaling preserves shape and finiteness")
    }
}

/// Z-score standardization with sample standard deviation.
/// Zero-variance columns are centered but not rescaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl StandardScaler {
    pub fn fit(x: &FeatureMatrix) -> Self {
        let n = x.rows() as f64;
        let mut mean = vec![0.0; x.cols()];
        for row in x.row_iter() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n.max(1.0));
        let mut var = vec![0.0; x.cols()];
        for row in x.row_iter() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / (n - 1.0).max(1.0)).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn transform(&self, x: &FeatureMatrix) -> FeatureMatrix {
        let data = x
            .row_iter()
            .flat_map(|r| r.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| (v - m) / s))
            .collect();
        x.with_data(x.cols(), data, x.names().to_vec())
            .expect("scaling preserves shape and finiteness")
    }
}
