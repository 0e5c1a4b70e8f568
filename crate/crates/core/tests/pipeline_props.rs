mod common;

use common::props;
use common::random_matrix;
use qembed::pipeline::{compute_vif, pca_fit, prepare, read_csv, PipelineConfig, Schema};
use qembed::synthetic::telco_like_csv;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn vif_matches_least_squares_oracle() {
    props::vif_oracle_equivalence(100, 31).unwrap();
}

#[test]
fn vif_is_at_least_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..20 {
        let x = random_matrix(80, 4, &mut rng);
        for e in compute_vif(&x).unwrap() {
            assert!(e.vif >= 1.0, "{e:?}");
        }
    }
}

#[test]
fn pca_reconstructs_at_full_rank() {
    props::pca_reconstruction(100, 33).unwrap();
}

#[test]
fn pca_component_variance_tracks_singular_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let x = random_matrix(200, 6, &mut rng);
    let pca = pca_fit(&x, 6).unwrap();
    assert!(pca.explained_variance_ratio.windows(2).all(|w| w[0] >= w[1]));
    let scores = pca.transform(&x).unwrap();
    let ratios: Vec<f64> = (0..6)
        .map(|j| {
            let col = scores.column(j);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
            var / pca.singular_values[j].powi(2)
        })
        .collect();
    for r in &ratios {
        assert!((r / ratios[0] - 1.0).abs() <= 1e-6, "{ratios:?}");
    }
}

#[test]
fn elbow_recovers_constructed_knee() {
    props::elbow_knee(500, 35).unwrap();
}

#[test]
fn split_and_undersample_properties() {
    props::split_properties(500, 36).unwrap();
}

fn synthetic(rows: usize, seed: u64) -> qembed::pipeline::Dataset {
    read_csv(telco_like_csv(rows, seed).as_bytes(), &Schema::telco()).unwrap()
}

#[test]
fn one_hot_groups_sum_to_one() {
    let ds = synthetic(300, 3);
    let cats = ds.categorical_names();
    let m = ds.one_hot(&cats).unwrap();
    for cat in &cats {
        let prefix = format!("{cat}=");
        let group: Vec<usize> = (0..m.cols()).filter(|&j| m.names()[j].starts_with(&prefix)).collect();
        assert!(!group.is_empty(), "{cat}");
        for i in 0..m.rows() {
            let s: f64 = group.iter().map(|&j| m.get(i, j)).sum();
            assert_eq!(s, 1.0, "row {i}, group {cat}");
        }
    }
}

#[test]
fn prepare_is_deterministic_and_leak_free() {
    let ds = synthetic(500, 7);
    let cfg = PipelineConfig { vif_recheck_drop: vec!["MonthlyCharges".into()], ..Default::default() };
    let a = prepare(&ds, &cfg).unwrap();
    let b = prepare(&ds, &cfg).unwrap();
    assert_eq!(a, b);
    let [neg, pos] = a.report.class_counts_after;
    assert_eq!(neg, pos);
    assert_eq!(a.train.rows() + a.test.rows(), neg + pos);
    assert_eq!(a.train.cols(), a.report.components_kept);
    // train scores are centred by construction; test scores need not be
    for j in 0..a.train.cols() {
        let mean = a.train.column(j).iter().sum::<f64>() / a.train.rows() as f64;
        assert!(mean.abs() < 1e-9, "component {j} mean {mean}");
    }
    let other = prepare(&ds, &PipelineConfig { split_seed: 43, ..cfg }).unwrap();
    assert_ne!(other.report.split_checksum, a.report.split_checksum);
}
