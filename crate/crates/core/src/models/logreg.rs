use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogregParams {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub l2: f64,
    /// Stop once the gradient's max-norm drops below this.
    pub tol: f64,
}

impl Default for LogregParams {
    fn default() -> Self {
        LogregParams { learning_rate: 0.1, max_epochs: 5000, l2: 1e-4, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogregModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean log-loss plus `l2/2 * |w|^2` (bias unpenalised), and its gradient
/// with respect to `(weights, bias)`; the bias component is last.
pub fn loss_and_grad(x: &FeatureMatrix, weights: &[f64], bias: f64, l2: f64) -> (f64, Vec<f64>) {
    let n = x.rows() as f64;
    let d = x.cols();
    let mut grad = vec![0.0; d + 1];
    let mut loss = 0.0;
    for (row, &y) in x.row_iter().zip(x.labels()) {
        let z = bias + row.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>();
        let y = f64::from(y);
        // -[y log p + (1-y) log(1-p)] = softplus(z) - y z
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        for (g, v) in grad.iter_mut().zip(row) {
            *g += r * v;
        }
        grad[d] += r;
    }
    loss /= n;
    for g in &mut grad {
        *g /= n;
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    for (g, w) in grad.iter_mut().zip(weights) {
        *g += l2 * w;
    }
    (loss, grad)
}

/// Full-batch gradient descent from zero. Returns the model, the number of
/// epochs run and whether the gradient tolerance was reached.
pub fn fit(x: &FeatureMatrix, p: &LogregParams) -> (LogregModel, usize, bool) {
    let d = x.cols();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    for epoch in 0..p.max_epochs {
        let (_, g) = loss_and_grad(x, &w, b, p.l2);
        if g.iter().all(|v| v.abs() < p.tol) {
            return (LogregModel { weights: w, bias: b }, epoch, true);
        }
        for (wi, gi) in w.iter_mut().zip(&g) {
            *wi -= p.learning_rate * gi;
        }
        b -= p.learning_rate * g[d];
    }
    let (_, g) = loss_and_grad(x, &w, b, p.l2);
    let converged = g.iter().all(|v| v.abs() < p.tol);
    (LogregModel { weights: w, bias: b }, p.max_epochs, converged)
}

impl LogregModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.bias + row.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}
