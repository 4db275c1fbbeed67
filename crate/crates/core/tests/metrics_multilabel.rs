mod common;

use std::collections::BTreeSet;

use can_core::metrics::{expected_accuracy, expected_gain, gain_report, loose_f1, top1_accuracy};
use can_core::multilabel::{decide_labels, from_binary_pairs, pair_priors, to_binary_pairs, MultilabelMatrix};
use can_core::{PriorVector, ProbabilityVector};
use ndarray::Array2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn label_sets(max_m: usize) -> impl Strategy<Value = Vec<BTreeSet<usize>>> {
    prop::collection::vec(prop::collection::btree_set(0..max_m, 0..max_m), 1..20)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pair_roundtrip_is_exact(n in 1usize..15, m in 1usize..15, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n * m).map(|_| rng.random::<f64>()).collect();
        let scores = MultilabelMatrix::new(Array2::from_shape_vec((n, m), data).unwrap()).unwrap();
        let block = to_binary_pairs(&scores);
        prop_assert_eq!(block.len(), n * m);
        for pair in block.rows() {
            prop_assert!((pair[0] + pair[1] - 1.0).abs() <= 1e-15);
        }
        prop_assert_eq!(from_binary_pairs(&block, n, m).unwrap(), scores);
    }

    #[test]
    fn every_example_gets_a_label(n in 1usize..10, m in 1usize..10, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n * m).map(|_| rng.random::<f64>() * 0.6).collect();
        let scores = MultilabelMatrix::new(Array2::from_shape_vec((n, m), data).unwrap()).unwrap();
        for (i, labels) in decide_labels(&scores).iter().enumerate() {
            let row = scores.scores().row(i);
            let expected: BTreeSet<usize> = (0..m).filter(|&j| row[j] >= 0.5).collect();
            if expected.is_empty() {
                prop_assert_eq!(labels.len(), 1);
                let j = *labels.iter().next().unwrap();
                prop_assert!(row.iter().all(|x| *x <= row[j]));
            } else {
                prop_assert_eq!(labels, &expected);
            }
        }
    }

    #[test]
    fn f1_is_bounded_and_perfect_on_itself(gold in label_sets(8)) {
        let same = loose_f1(&gold, &gold).unwrap();
        prop_assert_eq!([same.macro_f1, same.micro_f1], [1.0, 1.0]);
        let empty: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); gold.len()];
        let r = loose_f1(&empty, &gold).unwrap();
        for v in [r.macro_p, r.macro_r, r.macro_f1, r.micro_p, r.micro_r, r.micro_f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn gain_is_zero_without_change(seed in any::<u64>(), m in 2usize..20) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let b = ProbabilityVector::new(common::simplex(&mut rng, m, false)).unwrap();
        let q = PriorVector::new(common::simplex(&mut rng, m, false)).unwrap();
        prop_assert_eq!(expected_gain(&q, &b, &b).unwrap(), 0.0);
        let report = gain_report(&q, std::slice::from_ref(&b), std::slice::from_ref(&b)).unwrap();
        prop_assert_eq!(report.accuracy_gain, 0.0);
    }
}

#[test]
fn expected_accuracy_is_prior_weighted() {
    let q = PriorVector::new(vec![0.75, 0.25]).unwrap();
    let b = ProbabilityVector::new(vec![0.4, 0.6]).unwrap();
    assert!((expected_accuracy(&q, &b).unwrap() - (0.75 * 0.4 + 0.25 * 0.6) / 2.0).abs() < 1e-15);
}

#[test]
fn accuracy_gain_counts_positive_flips() {
    let q = PriorVector::new(vec![0.75, 0.25]).unwrap();
    let before = vec![
        ProbabilityVector::new(vec![0.4, 0.6]).unwrap(),
        ProbabilityVector::new(vec![0.6, 0.4]).unwrap(),
    ];
    let after = vec![
        ProbabilityVector::new(vec![0.7, 0.3]).unwrap(),
        ProbabilityVector::new(vec![0.3, 0.7]).unwrap(),
    ];
    let report = gain_report(&q, &before, &after).unwrap();
    assert!(report.per_example_delta[0] > 0.0 && report.per_example_delta[1] < 0.0);
    assert_eq!(report.accuracy_gain, 0.5);
}

#[test]
fn top1_uses_first_maximum() {
    let preds = [[0.5, 0.5], [0.2, 0.8]];
    assert_eq!(top1_accuracy(&preds, &[0, 1]).unwrap(), 1.0);
    assert_eq!(top1_accuracy(&preds, &[1, 0]).unwrap(), 0.0);
}

#[test]
fn pair_priors_follow_positive_rates() {
    let priors = pair_priors(&[0.2, 0.9]).unwrap();
    assert_eq!(priors[0].as_slice(), &[0.2, 0.8]);
    assert!((priors[1].as_slice()[1] - 0.1).abs() < 1e-15);
}
