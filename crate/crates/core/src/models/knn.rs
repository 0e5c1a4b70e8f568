use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub train: FeatureMatrix,
}

impl KnnModel {
    /// Indices of the `k` nearest training rows by Euclidean distance;
    /// equal distances go to the lower index.
    pub fn neighbours(&self, row: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .train
            .row_iter()
            .enumerate()
            .map(|(i, t)| (t.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    /// Fraction of positive labels among the neighbours.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let nb = self.neighbours(row);
        let labels = self.train.labels();
        nb.iter().filter(|&&i| labels[i] == 1).count() as f64 / nb.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_prefer_lower_index() {
        let rows = vec![vec![1.0], vec![-1.0], vec![1.0], vec![3.0]];
        let m = KnnModel { k: 2, train: FeatureMatrix::from_rows(&rows, vec![1, 0, 0, 1]).unwrap() };
        assert_eq!(m.neighbours(&[0.0]), vec![0, 1]);
        assert_eq!(m.predict_proba(&[0.0]), 0.5);
        assert_eq!(m.neighbours(&[2.0]), vec![0, 2]);
    }
}
