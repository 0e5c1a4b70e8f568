//! Property checks shared by the integration tests and the acceptance
//! suite. Each returns a short summary on success or a description of the
//! first violation.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use qembed::matrix::FeatureMatrix;
use qembed::metrics::{self, ConfusionCounts};
use qembed::models::ensemble::{fit_forest, fit_gbt, fit_samme, fit_tree, ForestParams, GbtParams, TreeParams};
use qembed::models::logreg::loss_and_grad;
use qembed::models::svm::{gram_matrix, smo};
use qembed::models::{fit, FittedParams, KernelFn, KnnParams, ModelKind, ModelSpec, SvmParams};
use qembed::pipeline::{compute_vif, find_elbow, pca_fit, train_test_split, undersample_indices};
use qembed::qsim::{hadamard, pauli_x, rx_gate, ry_gate, rz_gate, CircuitOp, Layout, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

pub type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---- simulator ----

fn random_op<R: Rng>(n: usize, rng: &mut R) -> CircuitOp {
    let mut distinct = |k: usize| -> Vec<usize> { rand::seq::index::sample(rng, n, k).into_vec() };
    match distinct(1)[0] % 4 {
        0 | 1 => {
            let t = distinct(1)[0];
            CircuitOp::Single { gate: random_gate(rng), target: t }
        }
        2 => {
            let q = distinct(2);
            CircuitOp::Cnot { control: q[0], target: q[1] }
        }
        _ => {
            let q = distinct(3);
            if rng.gen_bool(0.5) {
                CircuitOp::Swap { a: q[0], b: q[1] }
            } else {
                CircuitOp::Toffoli { c1: q[0], c2: q[1], target: q[2] }
            }
        }
    }
}

pub fn norm_preservation(n_gates: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 6;
    let mut state = StateVector::from_amplitudes(random_amplitudes(n, &mut rng), 24).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for g in 0..n_gates {
        let op = random_op(n, &mut rng);
        state.apply_mut(&op).map_err(|e| e.to_string())?;
        let dev = (state.norm_sqr() - 1.0).abs();
        worst = worst.max(dev);
        ensure(dev <= 1e-9, || format!("norm drifted by {dev:e} after gate {g}"))?;
    }
    Ok(format!("{n_gates} gates, max |norm^2 - 1| = {worst:.1e}"))
}

pub fn unitarity(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let g = random_gate(&mut rng);
        let e = g.unitarity_error();
        worst = worst.max(e);
        ensure(e <= 1e-12, || format!("unitarity error {e:e} for {g:?}"))?;
    }
    Ok(format!("{trials} gates, max error {worst:.1e}"))
}

pub fn involutions(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(3..=5);
        let s = StateVector::from_amplitudes(random_amplitudes(n, &mut rng), 24).unwrap();
        let q = rand::seq::index::sample(&mut rng, n, 3).into_vec();
        let ops = [
            CircuitOp::Single { gate: hadamard(), target: q[0] },
            CircuitOp::Single { gate: pauli_x(), target: q[1] },
            CircuitOp::Cnot { control: q[0], target: q[1] },
            CircuitOp::Swap { a: q[1], b: q[2] },
            CircuitOp::Toffoli { c1: q[0], c2: q[2], target: q[1] },
        ];
        for op in &ops {
            let twice = s.apply(op).unwrap().apply(op).unwrap();
            let d = twice.max_abs_diff(&s);
            worst = worst.max(d);
            ensure(d <= 1e-12, || format!("{op:?} applied twice moved the state by {d:e}"))?;
        }
    }
    Ok(format!("{trials} trials x 5 involutions, max deviation {worst:.1e}"))
}

pub fn rotation_composition(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (a, b) = (random_angle(&mut rng), random_angle(&mut rng));
        for r in [rx_gate, ry_gate, rz_gate] {
            let d = gate_diff(&r(a).unwrap().compose(&r(b).unwrap()), &r(a + b).unwrap());
            worst = worst.max(d);
            ensure(d <= 1e-12, || format!("R({a})R({b}) differs from R(a+b) by {d:e}"))?;
        }
    }
    Ok(format!("{trials} angle pairs x 3 axes, max deviation {worst:.1e}"))
}

/// Single-qubit circuits run in product layout, dense layout and through
/// an explicit Kronecker-product operator must agree.
pub fn product_dense_agreement(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(1..=5);
        let factors: Vec<[num_complex::Complex64; 2]> = (0..n)
            .map(|_| {
                let v = random_amplitudes(1, &mut rng);
                [v[0], v[1]]
            })
            .collect();
        let mut product = StateVector::from_factors(factors, 24).unwrap();
        let mut dense = product.clone().into_dense();
        let mut oracle = dense.amplitudes();
        for _ in 0..rng.gen_range(1..8) {
            let target = rng.gen_range(0..n);
            let gate = random_gate(&mut rng);
            let op = CircuitOp::Single { gate, target };
            product.apply_mut(&op).unwrap();
            dense.apply_mut(&op).unwrap();
            oracle = mat_vec(&kron_operator(&gate, target, n), &oracle);
        }
        ensure(product.layout() == Layout::Product, || "single-qubit gates densified the state".into())?;
        let d = product.max_abs_diff(&dense).max(max_diff(&dense.amplitudes(), &oracle));
        worst = worst.max(d);
        ensure(d <= 1e-12, || format!("layouts disagree by {d:e} on {n} qubits"))?;
    }
    Ok(format!("{trials} circuits, max deviation {worst:.1e}"))
}

// ---- pipeline ----

pub fn vif_oracle_equivalence(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(30..120);
        let d = rng.gen_range(2..7);
        let mut x = random_matrix(n, d, &mut rng);
        // mix columns so some VIFs are well above 1
        if d >= 3 {
            let mixed: Vec<f64> = (0..n)
                .flat_map(|i| {
                    let r = x.row(i).to_vec();
                    let last = r[0] * 0.8 + r[1] * 0.5 + r[d - 1] * 0.2;
                    r[..d - 1].iter().copied().chain(std::iter::once(last)).collect::<Vec<_>>()
                })
                .collect();
            x = x.with_data(d, mixed, x.names().to_vec()).unwrap();
        }
        let got = compute_vif(&x).map_err(|e| e.to_string())?;
        let want = vif_oracle(&x);
        for (g, w) in got.iter().zip(&want) {
            let err = (g.vif - w).abs() / w.abs().max(1.0);
            worst = worst.max(err);
            ensure(err <= 1e-9, || format!("VIF {} vs oracle {w} (n={n}, d={d})", g.vif))?;
        }
    }
    Ok(format!("{trials} matrices, max relative error {worst:.1e}"))
}

pub fn pca_reconstruction(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let d = rng.gen_range(2..8);
        let n = rng.gen_range(d + 2..60);
        let x = random_matrix(n, d, &mut rng);
        let pca = pca_fit(&x, d).map_err(|e| e.to_string())?;
        for i in 0..n {
            let back = pca.inverse_transform_row(&pca.transform_row(x.row(i)));
            for (a, b) in back.iter().zip(x.row(i)) {
                worst = worst.max((a - b).abs());
            }
        }
        ensure(worst <= 1e-8, || format!("reconstruction error {worst:e} at n={n}, d={d}"))?;
        // explained variance against eigenvalues of the covariance matrix
        let m = DMatrix::from_row_slice(n, d, x.data());
        let mean = m.row_mean();
        let centered = DMatrix::from_fn(n, d, |i, j| m[(i, j)] - mean[j]);
        let cov = centered.transpose() * &centered / (n as f64 - 1.0);
        let mut eig: Vec<f64> = SymmetricEigen::new(cov).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = eig.iter().sum();
        for (r, e) in pca.explained_variance_ratio.iter().zip(&eig) {
            let diff = (r - e / total).abs();
            ensure(diff <= 1e-10, || format!("variance ratio {r} vs covariance eigen {}", e / total))?;
        }
    }
    Ok(format!("{trials} matrices at k = d, max reconstruction error {worst:.1e}"))
}

pub fn elbow_knee(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let len = rng.gen_range(5..60);
        let knee = rng.gen_range(1..len - 2);
        let high = rng.gen_range(0.5..1.0);
        let low = high * rng.gen_range(0.0..0.05);
        // `knee + 1` steep components then a flat tail: the cumulative curve
        // bends at index `knee`
        let raw: Vec<f64> = (0..len).map(|i| if i <= knee { high } else { low }).collect();
        let total: f64 = raw.iter().sum();
        let ratios: Vec<f64> = raw.iter().map(|r| r / total).collect();
        let got = find_elbow(&ratios).map_err(|e| e.to_string())?;
        ensure(got == knee, || format!("elbow {got}, constructed knee {knee} (len {len})"))?;
    }
    Ok(format!("{trials} constructed spectra, knee recovered exactly"))
}

pub fn split_properties(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let n = rng.gen_range(4..400);
        let p = rng.gen_range(0.05..0.95);
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(p))).collect();
        labels[0] = 0;
        labels[1] = 0;
        labels[2] = 1;
        labels[3] = 1;
        let ratio = rng.gen_range(0.1..0.95);
        let split_seed = rng.gen();
        let s = train_test_split(&labels, ratio, split_seed).map_err(|e| e.to_string())?;
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        ensure(all == (0..n).collect::<Vec<_>>(), || format!("trial {t}: split is not a partition"))?;
        for class in [0u8, 1] {
            let total = labels.iter().filter(|&&l| l == class).count();
            let in_train = s.train.iter().filter(|&&i| labels[i] == class).count();
            let want = ((total as f64 * ratio).floor() as usize).clamp(1, total - 1);
            ensure(in_train == want, || {
                format!("trial {t}: class {class} has {in_train} train rows, expected {want}")
            })?;
        }
        let again = train_test_split(&labels, ratio, split_seed).unwrap();
        ensure(again == s && again.checksum() == s.checksum(), || format!("trial {t}: split not deterministic"))?;

        let u = undersample_indices(&labels, split_seed).map_err(|e| e.to_string())?;
        let pos = u.iter().filter(|&&i| labels[i] == 1).count();
        let minority = labels.iter().filter(|&&l| l == 1).count().min(labels.iter().filter(|&&l| l == 0).count());
        let mut uniq = u.clone();
        uniq.sort_unstable();
        uniq.dedup();
        ensure(pos * 2 == u.len() && pos == minority && uniq.len() == u.len(), || {
            format!("trial {t}: undersample not balanced without replacement")
        })?;
    }
    Ok(format!("{trials} random label vectors: partition, stratification, determinism, balance"))
}

// ---- models ----

pub fn logreg_gradient(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let d = rng.gen_range(1..6);
        let x = classification_data(rng.gen_range(5..40), d, &mut rng);
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let l2 = rng.gen_range(0.0..0.1);
        let (_, grad) = loss_and_grad(&x, &w, b, l2);
        for k in 0..=d {
            let shifted = |delta: f64| {
                let mut w2 = w.clone();
                let mut b2 = b;
                if k < d {
                    w2[k] += delta;
                } else {
                    b2 += delta;
                }
                loss_and_grad(&x, &w2, b2, l2).0
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let rel = (fd - grad[k]).abs() / fd.abs().max(grad[k].abs()).max(1e-8);
            worst = worst.max(rel);
            ensure(rel < 1e-4, || format!("component {k}: analytic {} vs finite difference {fd}", grad[k]))?;
        }
    }
    Ok(format!("{trials} problems, max relative error {worst:.1e}"))
}

pub fn knn_memorises(x: &FeatureMatrix) -> Check {
    let m = fit(&ModelSpec::new(ModelKind::Knn(KnnParams { k: 1 })), x).map_err(|e| e.to_string())?;
    let p = m.predict_proba(x).map_err(|e| e.to_string())?;
    let wrong = p.iter().zip(x.labels()).filter(|(p, &y)| (**p >= 0.5) != (y == 1)).count();
    ensure(wrong == 0, || format!("k=1 misclassified {wrong} training rows"))?;
    Ok(format!("k=1 training accuracy 1.0 on {} rows", x.rows()))
}

pub fn svm_dual_feasible(x: &FeatureMatrix) -> Check {
    let mut summary = Vec::new();
    for (name, kernel) in [
        ("linear", KernelFn::Linear),
        ("rbf", KernelFn::Rbf { gamma: 1.0 / x.cols() as f64 }),
        ("poly", KernelFn::Polynomial { degree: 2, coef0: 1.0, gamma: 1.0 / x.cols() as f64 }),
    ] {
        let c = 1.0;
        let p = SvmParams::default();
        let y: Vec<f64> = x.labels().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let res = smo(&gram_matrix(x, &kernel), &y, c, p.tol, p.max_iter);
        ensure(res.converged, || format!("{name}: SMO hit the iteration cap"))?;
        let sum: f64 = res.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        ensure(sum.abs() < 1e-6, || format!("{name}: |sum alpha y| = {sum:e}"))?;
        ensure(res.alpha.iter().all(|&a| (0.0..=c).contains(&a)), || format!("{name}: alpha outside [0, C]"))?;
        summary.push(format!("{name} |sum alpha y| = {:.1e}", sum.abs()));
    }
    Ok(summary.join(", "))
}

pub fn rbf_gram_psd(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lowest = f64::INFINITY;
    for _ in 0..trials {
        let x = random_matrix(20, rng.gen_range(1..6), &mut rng);
        let k = KernelFn::Rbf { gamma: rng.gen_range(0.1..5.0) };
        let g = gram_matrix(&x, &k);
        let m = DMatrix::from_row_slice(20, 20, &g);
        ensure(m == m.transpose(), || "Gram matrix not symmetric".into())?;
        let min = SymmetricEigen::new(m).eigenvalues.min();
        lowest = lowest.min(min);
        ensure(min > -1e-8, || format!("Gram min eigenvalue {min:e}"))?;
    }
    Ok(format!("{trials} RBF Gram matrices, min eigenvalue {lowest:.1e}"))
}

pub fn forest_single_tree(x: &FeatureMatrix) -> Check {
    let tp = TreeParams { max_depth: Some(6), min_leaf: 2 };
    let fp = ForestParams {
        n_trees: 1,
        feature_fraction: Some(1.0),
        bootstrap: false,
        max_depth: tp.max_depth,
        min_leaf: tp.min_leaf,
    };
    let tree = fit_tree(x, &tp);
    let forest = fit_forest(x, &fp, 99);
    ensure(forest.len() == 1 && forest[0] == tree, || "forest tree differs from single tree".into())?;
    for i in 0..x.rows() {
        let (a, b) = (tree.predict(x.row(i)), qembed::models::ensemble::forest_proba(&forest, x.row(i)));
        ensure(a == b, || format!("row {i}: tree {a} vs forest {b}"))?;
    }
    Ok(format!("identical structure and predictions on {} rows", x.rows()))
}

pub fn adaboost_weights(x: &FeatureMatrix) -> Check {
    let fit = fit_samme(x, 100);
    ensure(!fit.weight_sums.is_empty(), || "no boosting rounds ran".into())?;
    let worst = fit.weight_sums.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-12, || format!("weight sum off by {worst:e}"))?;
    Ok(format!("{} rounds, max |sum w - 1| = {worst:.1e}", fit.weight_sums.len()))
}

pub fn gbt_monotone(x: &FeatureMatrix) -> Check {
    let (_, trace) = fit_gbt(x, &GbtParams::default());
    for (r, w) in trace.windows(2).enumerate() {
        ensure(w[1] <= w[0], || format!("loss rose at round {}: {} -> {}", r + 1, w[0], w[1]))?;
    }
    Ok(format!("{} rounds, loss {:.4} -> {:.4}", trace.len() - 1, trace[0], trace[trace.len() - 1]))
}

pub fn model_determinism(x: &FeatureMatrix) -> Check {
    for kind in [
        ModelKind::Forest(ForestParams { n_trees: 10, ..Default::default() }),
        ModelKind::Svm(SvmParams::default()),
        ModelKind::Gbt(GbtParams { n_rounds: 10, ..Default::default() }),
    ] {
        let spec = ModelSpec::new(kind).with_seed(5);
        let a = fit(&spec, x).unwrap();
        let b = fit(&spec, x).unwrap();
        ensure(a.params == b.params, || format!("{} refit differs", spec.name()))?;
        ensure(a.predict_proba(x).unwrap() == b.predict_proba(x).unwrap(), || "predictions differ".into())?;
        if let FittedParams::Forest { trees } = &a.params {
            ensure(trees.len() == 10, || "wrong tree count".into())?;
        }
    }
    Ok("forest, svm and gbt refits are identical".into())
}

// ---- metrics ----

fn oracle_counts(y: &[u8], p: &[u8]) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for i in 0..y.len() {
        if y[i] == 1 && p[i] == 1 {
            c.tp += 1;
        } else if y[i] == 0 && p[i] == 1 {
            c.fp += 1;
        } else if y[i] == 0 && p[i] == 0 {
            c.tn += 1;
        } else {
            c.fn_ += 1;
        }
    }
    c
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half, by enumerating every pair.
pub fn pairwise_auc(y: &[u8], s: &[f64]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..y.len() {
        for j in 0..y.len() {
            if y[i] == 1 && y[j] == 0 {
                pairs += 1.0;
                if s[i] > s[j] {
                    wins += 1.0;
                } else if s[i] == s[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// Trapezoidal area under the ROC curve swept over every distinct score.
pub fn trapezoid_auc(y: &[u8], s: &[f64]) -> f64 {
    let mut thresholds: Vec<f64> = s.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let pos = y.iter().filter(|&&v| v == 1).count() as f64;
    let neg = y.len() as f64 - pos;
    let mut pts = vec![(0.0, 0.0)];
    for t in thresholds {
        let tp = (0..y.len()).filter(|&i| s[i] >= t && y[i] == 1).count() as f64;
        let fp = (0..y.len()).filter(|&i| s[i] >= t && y[i] == 0).count() as f64;
        pts.push((fp / neg, tp / pos));
    }
    pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
        _ => false,
    }
}

pub fn metrics_oracles(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut undefined = 0;
    for t in 0..trials {
        let n = rng.gen_range(1..=64);
        let y: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(0.5))).collect();
        // coarse scores so ties occur
        let s: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..12u8)) / 11.0).collect();
        let pred = metrics::threshold_scores(&s, 0.5);
        let c = metrics::confusion(&y, &pred).map_err(|e| e.to_string())?;
        let o = oracle_counts(&y, &pred);
        ensure(c == o, || format!("trial {t}: confusion {c:?} vs {o:?}"))?;

        let n_f = n as f64;
        let (tp, fp, tn, fn_) = (o.tp as f64, o.fp as f64, o.tn as f64, o.fn_ as f64);
        let acc = Some((tp + tn) / n_f);
        let prec = (tp + fp > 0.0).then(|| tp / (tp + fp));
        let rec = (tp + fn_ > 0.0).then(|| tp / (tp + fn_));
        let f1 = match (prec, rec) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        let p_o = (tp + tn) / n_f;
        let p_e = ((tp + fn_) * (tp + fp) + (tn + fp) * (tn + fn_)) / (n_f * n_f);
        let kappa = (p_e < 1.0).then(|| (p_o - p_e) / (1.0 - p_e));
        let got_kappa = metrics::cohen_kappa(&y, &pred).map_err(|e| e.to_string())?;
        for (name, got, want) in [
            ("accuracy", metrics::accuracy(&c), acc),
            ("precision", metrics::precision(&c), prec),
            ("recall", metrics::recall(&c), rec),
            ("f1", metrics::f1(&c), f1),
            ("kappa", got_kappa, kappa),
        ] {
            ensure(close(got, want), || format!("trial {t}: {name} {got:?} vs oracle {want:?}"))?;
            undefined += usize::from(want.is_none());
        }
        let both = y.contains(&0) && y.contains(&1);
        match metrics::roc_auc(&y, &s) {
            Ok(auc) => {
                ensure(both, || format!("trial {t}: AUC defined on a single class"))?;
                let (pw, tz) = (pairwise_auc(&y, &s), trapezoid_auc(&y, &s));
                ensure((auc - pw).abs() <= 1e-12 && (auc - tz).abs() <= 1e-12, || {
                    format!("trial {t}: rank AUC {auc} vs pairwise {pw} vs trapezoid {tz}")
                })?;
            }
            Err(metrics::MetricsError::SingleClass) => ensure(!both, || format!("trial {t}: spurious SingleClass"))?,
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(format!("{trials} instances, six metrics and two AUC oracles agree ({undefined} undefined values matched)"))
}
