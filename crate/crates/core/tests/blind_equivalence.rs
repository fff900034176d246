use std::collections::BTreeMap;

use blindqc::mbqc::{plain_output_distribution, BrickworkPattern};
use blindqc::seed::trial_seed;
use blindqc::ubqc::{
    blind_output_distribution, delta_message_distribution, run_ubqc, server_view_state, HonestServer, Preparation,
    ReportingRule,
};
use blindqc::{trace_distance, Angle8};

fn a(k: i64) -> Angle8 {
    Angle8::new(k)
}

#[test]
fn two_by_one_blind_matches_plain_for_every_key() {
    for phi in [[0, 0], [1, 6], [3, 4], [7, 2]] {
        let pattern = BrickworkPattern::new(2, 1, phi.iter().map(|&k| a(k)).collect()).unwrap();
        let plain = plain_output_distribution(&pattern).unwrap();
        for t0 in Angle8::all() {
            for t1 in Angle8::all() {
                for r in [[false, false], [false, true], [true, false], [true, true]] {
                    let blind = blind_output_distribution(&pattern, &[t0, t1], &r).unwrap();
                    for k in plain.keys().chain(blind.keys()) {
                        let x = plain.get(k).copied().unwrap_or(0.0);
                        let y = blind.get(k).copied().unwrap_or(0.0);
                        assert!((x - y).abs() < 1e-9, "φ={phi:?} θ=({t0},{t1}) r={r:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn two_by_two_monte_carlo_matches_plain() {
    let pattern = BrickworkPattern::new(2, 2, vec![a(1), a(2), a(5), a(3)]).unwrap();
    let exact = plain_output_distribution(&pattern).unwrap();
    let trials = 4096u64;
    let mut counts: BTreeMap<Vec<bool>, u64> = BTreeMap::new();
    for i in 0..trials {
        let run = run_ubqc(&pattern, &mut HonestServer, &Preparation::Ideal, trial_seed(77, i)).unwrap();
        *counts.entry(run.result.unwrap().corrected_outputs).or_insert(0) += 1;
    }
    let tv: f64 = 0.5
        * exact
            .keys()
            .chain(counts.keys())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|k| {
                let p = exact.get(k).copied().unwrap_or(0.0);
                let q = counts.get(k).copied().unwrap_or(0) as f64 / trials as f64;
                (p - q).abs()
            })
            .sum::<f64>();
    assert!(tv <= 0.05, "TV = {tv}");
}

#[test]
fn single_position_server_view_is_phi_independent() {
    let reference = server_view_state(Angle8::ZERO);
    for phi in Angle8::all() {
        assert!(trace_distance(&reference, &server_view_state(phi)).unwrap() < 1e-12);
    }
}

#[test]
fn delta_messages_are_uniform_for_any_reporting() {
    let pattern = BrickworkPattern::new(2, 1, vec![a(3), a(6)]).unwrap();
    for rule in [
        ReportingRule::Honest,
        ReportingRule::Constant(true),
        ReportingRule::Inverted,
        ReportingRule::Uniform,
    ] {
        let dist = delta_message_distribution(&pattern, rule).unwrap();
        assert_eq!(dist.len(), 64);
        for p in dist.values() {
            assert!((p - 1.0 / 64.0).abs() < 1e-12, "{rule:?}");
        }
    }
}
