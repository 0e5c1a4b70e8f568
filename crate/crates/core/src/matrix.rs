//! Dense row-major feature matrix with binary labels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("expected {expected} values for a {rows}x{cols} matrix, got {got}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },
    #[error("{names} column names for {cols} columns")]
    NameCount { names: usize, cols: usize },
    #[error("{labels} labels for {rows} rows")]
    LabelCount { labels: usize, rows: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("label {value} at row {row} is not 0 or 1")]
    BadLabel { row: usize, value: u8 },
}

/// Samples x features, plus a 0/1 label per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    names: Vec<String>,
    labels: Vec<u8>,
}

impl FeatureMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        data: Vec<f64>,
        names: Vec<String>,
        labels: Vec<u8>,
    ) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::ShapeMismatch {
                rows,
                cols,
                expected: rows * cols,
                got: data.len(),
            });
        }
        if names.len() != cols {
            return Err(MatrixError::NameCount { names: names.len(), cols });
        }
        if labels.len() != rows {
            return Err(MatrixError::LabelCount { labels: labels.len(), rows });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(MatrixError::NonFinite { row: i / cols.max(1), col: i % cols.max(1) });
        }
        if let Some(row) = labels.iter().position(|&l| l > 1) {
            return Err(MatrixError::BadLabel { row, value: labels[row] });
        }
        Ok(Self { rows, cols, data, names, labels })
    }

    /// Builds from row vectors with generated column names `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u8>) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(MatrixError::ShapeMismatch {
                    rows: r + 1,
                    cols,
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        let names = (0..cols).map(|j| format!("x{j}")).collect();
        Self::new(rows.len(), cols, data, names, labels)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Rows picked by index, in the given order (repeats allowed).
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
            names: self.names.clone(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(cols.iter().map(|&j| row[j]));
        }
        Self {
            rows: self.rows,
            cols: cols.len(),
            data,
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn drop_column(&self, j: usize) -> Self {
        let keep: Vec<usize> = (0..self.cols).filter(|&c| c != j).collect();
        self.select_columns(&keep)
    }

    /// Same labels, new feature values.
    pub fn with_data(&self, cols: usize, data: Vec<f64>, names: Vec<String>) -> Result<Self, MatrixError> {
        Self::new(self.rows, cols, data, names, self.labels.clone())
    }

    /// Counts of label 0 and label 1.
    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        [self.rows - pos, pos]
    }
}
