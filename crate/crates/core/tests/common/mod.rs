#![allow(dead_code, clippy::needless_range_loop)]

pub mod props;

use num_complex::Complex64;
use qembed::matrix::FeatureMatrix;
use qembed::qsim::{hadamard, pauli_x, rx_gate, ry_gate, rz_gate, s_gate, Gate1Q};
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_angle<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(-4.0 * std::f64::consts::PI..4.0 * std::f64::consts::PI)
}

/// One of H, X, S, Rx, Ry, Rz or a random Euler-angle unitary.
pub fn random_gate<R: Rng>(rng: &mut R) -> Gate1Q {
    match rng.gen_range(0..7) {
        0 => hadamard(),
        1 => pauli_x(),
        2 => s_gate(),
        3 => rx_gate(random_angle(rng)).unwrap(),
        4 => ry_gate(random_angle(rng)).unwrap(),
        5 => rz_gate(random_angle(rng)).unwrap(),
        _ => rz_gate(random_angle(rng))
            .unwrap()
            .compose(&ry_gate(random_angle(rng)).unwrap())
            .compose(&rz_gate(random_angle(rng)).unwrap()),
    }
}

pub fn random_amplitudes<R: Rng>(n_qubits: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..1usize << n_qubits)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut v {
        *a /= norm;
    }
    v
}

/// Dense `2^n x 2^n` operator for `gate` on `target`, built from explicit
/// Kronecker products (qubit `n-1` is the leftmost factor).
pub fn kron_operator(gate: &Gate1Q, target: usize, n: usize) -> Vec<Vec<Complex64>> {
    let id = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    let mut op = vec![vec![c(1.0, 0.0)]];
    for q in (0..n).rev() {
        let m = if q == target { gate.matrix() } else { id };
        let d = op.len();
        let mut next = vec![vec![c(0.0, 0.0); 2 * d]; 2 * d];
        for (i, row) in op.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        next[2 * i + a][2 * j + b] = v * m[a][b];
                    }
                }
            }
        }
        op = next;
    }
    op
}

pub fn mat_vec(op: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    op.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn gate_diff(a: &Gate1Q, b: &Gate1Q) -> f64 {
    let (a, b) = (a.matrix(), b.matrix());
    let mut worst: f64 = 0.0;
    for r in 0..2 {
        for k in 0..2 {
            worst = worst.max((a[r][k] - b[r][k]).norm());
        }
    }
    worst
}

pub fn random_matrix<R: Rng>(n: usize, d: usize, rng: &mut R) -> FeatureMatrix {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let labels = (0..n).map(|i| (i % 2) as u8).collect();
    FeatureMatrix::from_rows(&rows, labels).unwrap()
}

/// Labelled data with a noisy linear boundary and distinct rows.
pub fn classification_data<R: Rng>(n: usize, d: usize, rng: &mut R) -> FeatureMatrix {
    let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let z: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-0.5..0.5);
        // alternate forced labels keep both classes present
        let y = if i < 2 { (i % 2) as u8 } else { u8::from(z > 0.0) };
        rows.push(x);
        labels.push(y);
    }
    FeatureMatrix::from_rows(&rows, labels).unwrap()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// VIF of every column via the normal equations of an intercept
/// regression on the remaining columns.
pub fn vif_oracle(x: &FeatureMatrix) -> Vec<f64> {
    let (n, d) = (x.rows(), x.cols());
    (0..d)
        .map(|j| {
            let y = x.column(j);
            let others: Vec<usize> = (0..d).filter(|&k| k != j).collect();
            // design matrix [1, x_others]
            let p = others.len() + 1;
            let design = |i: usize, k: usize| if k == 0 { 1.0 } else { x.get(i, others[k - 1]) };
            let mut xtx = vec![vec![0.0; p]; p];
            let mut xty = vec![0.0; p];
            for i in 0..n {
                for a in 0..p {
                    xty[a] += design(i, a) * y[i];
                    for b in 0..p {
                        xtx[a][b] += design(i, a) * design(i, b);
                    }
                }
            }
            let beta = gauss_solve(xtx, xty);
            let mean = y.iter().sum::<f64>() / n as f64;
            let (mut rss, mut tss) = (0.0, 0.0);
            for i in 0..n {
                let fit: f64 = (0..p).map(|k| beta[k] * design(i, k)).sum();
                rss += (y[i] - fit).powi(2);
                tss += (y[i] - mean).powi(2);
            }
            1.0 / (rss / tss)
        })
        .collect()
}
