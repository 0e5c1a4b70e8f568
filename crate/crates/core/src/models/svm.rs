//! C-SVM trained by SMO on the dual, with second-order working-set
//! selection. The Gram matrix is computed once up front.

use serde::{Deserialize, Serialize};

use super::kernel::{KernelFn, KernelSpec};
use super::logreg::sigmoid;
use crate::matrix::FeatureMatrix;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelSpec,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, kernel: KernelSpec::default(), tol: 1e-3, max_iter: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: KernelFn,
    pub c: f64,
    /// `alpha_i * y_i` for every support vector, `y` in {-1, +1}.
    pub dual_coef: Vec<f64>,
    pub support: FeatureMatrix,
    /// Training-row index of each support vector.
    pub support_index: Vec<usize>,
    pub rho: f64,
}

pub struct SmoResult {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `min 1/2 a'Qa - 1'a` s.t. `0 <= a <= c`, `y'a = 0`.
pub fn smo(gram: &[f64], y: &[f64], c: f64, tol: f64, max_iter: usize) -> SmoResult {
    let n = y.len();
    let k = |i: usize, j: usize| gram[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // i: maximal violator among I_up
        let (mut gmax, mut i) = (f64::NEG_INFINITY, usize::MAX);
        for t in 0..n {
            let v = -y[t] * grad[t];
            let in_up = if y[t] > 0.0 { !upper(alpha[t]) } else { !lower(alpha[t]) };
            if in_up && v > gmax {
                gmax = v;
                i = t;
            }
        }
        // j: second-order choice among I_low
        let (mut gmax2, mut j, mut best) = (f64::NEG_INFINITY, usize::MAX, f64::INFINITY);
        for t in 0..n {
            let in_low = if y[t] > 0.0 { !lower(alpha[t]) } else { !upper(alpha[t]) };
            if !in_low {
                continue;
            }
            let v = y[t] * grad[t];
            gmax2 = gmax2.max(v);
            let diff = gmax + v;
            if i != usize::MAX && diff > 0.0 {
                let mut quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
                if quad <= 0.0 {
                    quad = TAU;
                }
                let obj = -(diff * diff) / quad;
                if obj < best {
                    best = obj;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < tol || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;

        let (ai, aj) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * k(i, j);
        if y[i] != y[j] {
            let mut quad = k(i, i) + k(j, j) + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = k(i, i) + k(j, j) - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
        }
    }

    let (mut ub, mut lb, mut sum_free, mut n_free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };
    SmoResult { alpha, rho, iterations, converged }
}

pub fn gram_matrix(x: &FeatureMatrix, kernel: &KernelFn) -> Vec<f64> {
    use rayon::prelude::*;
    let n = x.rows();
    let mut g = vec![0.0; n * n];
    g.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let a = x.row(i);
        for (j, v) in row.iter_mut().enumerate() {
            *v = kernel.apply(a, x.row(j));
        }
    });
    g
}

pub fn fit(x: &FeatureMatrix, p: &SvmParams, kernel: KernelFn) -> (SvmModel, usize, bool) {
    let y: Vec<f64> = x.labels().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let gram = gram_matrix(x, &kernel);
    let res = smo(&gram, &y, p.c, p.tol, p.max_iter);
    let support_index: Vec<usize> = (0..x.rows()).filter(|&i| res.alpha[i] > 0.0).collect();
    let dual_coef = support_index.iter().map(|&i| res.alpha[i] * y[i]).collect();
    let model = SvmModel {
        kernel,
        c: p.c,
        dual_coef,
        support: x.select_rows(&support_index),
        support_index,
        rho: res.rho,
    };
    (model, res.iterations, res.converged)
}

impl SvmModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.support
            .row_iter()
            .zip(&self.dual_coef)
            .map(|(sv, a)| a * self.kernel.apply(sv, row))
            .sum::<f64>()
            - self.rho
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_pair_linear() {
        // optimum: w = 1, b = 0, alpha = 1/2 for both points
        let x = FeatureMatrix::from_rows(&[vec![-1.0], vec![1.0]], vec![0, 1]).unwrap();
        let p = SvmParams { c: 10.0, ..Default::default() };
        let (m, _, converged) = fit(&x, &p, KernelFn::Linear);
        assert!(converged);
        assert!(m.rho.abs() < 1e-12);
        assert!((m.decision(&[1.0]) - 1.0).abs() < 1e-9);
        assert!((m.dual_coef[0] + 0.5).abs() < 1e-9 && (m.dual_coef[1] - 0.5).abs() < 1e-9);
        assert!(m.predict_proba(&[2.0]) > 0.5);
    }
}
