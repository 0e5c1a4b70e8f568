mod common;

use common::props::{self, pairwise_auc, trapezoid_auc};
use proptest::prelude::*;
use qembed::metrics::{roc_auc, MetricReport};

#[test]
fn metrics_match_brute_force() {
    props::metrics_oracles(300, 21).unwrap();
}

#[test]
fn oracles_agree_on_known_case() {
    let y = [0, 0, 1, 1];
    let s = [0.1, 0.4, 0.35, 0.8];
    assert_eq!(pairwise_auc(&y, &s), 0.75);
    assert_eq!(trapezoid_auc(&y, &s), 0.75);
    assert_eq!(roc_auc(&y, &s).unwrap(), 0.75);
}

fn labelled_scores() -> impl Strategy<Value = (Vec<u8>, Vec<f64>)> {
    (2usize..40).prop_flat_map(|n| {
        (prop::collection::vec(0u8..2, n), prop::collection::vec(0u8..8, n)).prop_map(|(mut y, s)| {
            y[0] = 0;
            y[1] = 1;
            (y, s.into_iter().map(|v| f64::from(v) / 7.0).collect())
        })
    })
}

proptest! {
    #[test]
    fn auc_complement((y, s) in labelled_scores()) {
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let sum = roc_auc(&y, &s).unwrap() + roc_auc(&y, &neg).unwrap();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn report_is_permutation_invariant((y, s) in labelled_scores(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut order: Vec<usize> = (0..y.len()).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let y2: Vec<u8> = order.iter().map(|&i| y[i]).collect();
        let s2: Vec<f64> = order.iter().map(|&i| s[i]).collect();
        let a = MetricReport::evaluate(&y, &s, 0.5).unwrap();
        let b = MetricReport::evaluate(&y2, &s2, 0.5).unwrap();
        prop_assert_eq!(a.confusion, b.confusion);
        prop_assert!((a.roc_auc.unwrap() - b.roc_auc.unwrap()).abs() <= 1e-12);
    }
}
