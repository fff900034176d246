use std::collections::BTreeMap;

use blindqc::mbqc::{conditional_output_distributions, BrickworkPattern};
use blindqc::seed::rng_from_seed;
use blindqc::Angle8;
use proptest::prelude::*;
use rand::Rng;

fn assert_branch_independent(pattern: &BrickworkPattern) {
    let conditionals = conditional_output_distributions(pattern).unwrap();
    let (_, _, reference) = &conditionals[0];
    for (history, weight, dist) in &conditionals {
        assert!(*weight > 0.0);
        let keys: Vec<_> = reference.keys().chain(dist.keys()).collect();
        for k in keys {
            let a = reference.get(k).copied().unwrap_or(0.0);
            let b = dist.get(k).copied().unwrap_or(0.0);
            assert!(
                (a - b).abs() < 1e-9,
                "n={} m={} φ={:?} history={history:?} output={k:?}: {a} vs {b}",
                pattern.n(),
                pattern.m(),
                pattern.phi()
            );
        }
    }
}

fn shapes(max_size: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 1..=max_size {
        for m in 1..=max_size {
            if n * m <= max_size {
                out.push((n, m));
            }
        }
    }
    out
}

#[test]
fn small_patterns_are_branch_independent() {
    let mut rng = rng_from_seed(4);
    for (n, m) in shapes(6) {
        for _ in 0..50 {
            let phi = (0..n * m).map(|_| Angle8::new(rng.random_range(0..8))).collect();
            assert_branch_independent(&BrickworkPattern::new(n, m, phi).unwrap());
        }
    }
}

#[test]
fn output_distribution_sums_to_one() {
    let pattern = BrickworkPattern::uniform(2, 3, Angle8::new(3)).unwrap();
    let conditionals = conditional_output_distributions(&pattern).unwrap();
    let total: f64 = conditionals.iter().map(|(_, w, _)| w).sum();
    assert!((total - 1.0).abs() < 1e-12);
    for (_, _, d) in &conditionals {
        let s: f64 = d.values().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
    let merged: BTreeMap<_, f64> = conditionals
        .iter()
        .flat_map(|(_, _, d)| d.keys().cloned())
        .map(|k| (k, 0.0))
        .collect();
    assert!(!merged.is_empty());
}

fn pattern_strategy() -> impl Strategy<Value = BrickworkPattern> {
    prop::sample::select(shapes(10)).prop_flat_map(|(n, m)| {
        prop::collection::vec(0i64..8, n * m)
            .prop_map(move |raw| BrickworkPattern::new(n, m, raw.into_iter().map(Angle8::new).collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn patterns_up_to_ten_qubits_are_branch_independent(pattern in pattern_strategy()) {
        assert_branch_independent(&pattern);
    }
}
