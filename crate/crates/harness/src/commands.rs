//! The five harness commands.
//!
//! Each `cmd_*` function takes a fully resolved configuration and an optional
//! output directory, writes its files there, and returns the report that also
//! goes to `summary.json`. Wall-clock time is left out of every file so that
//! reruns compare byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use blindqc::analysis::{
    build_joint_state, certified_epsilon, epsilon_prep, fail_abort_bound, hoeffding_abort_bound, joint_trace_distance,
    marginal_trace_distance, CptpMap, PreparationModel, Prior,
};
use blindqc::i1dc::{client_theta, run_i1dc, run_i1dc_forced, t_from_s};
use blindqc::mbqc::{plain_output_distribution, run_plain_mbqc, BrickworkPattern};
use blindqc::qsim::fidelity;
use blindqc::rbsp::{required_pulses, run_rbsp, vacuum_threshold, ServerStrategy};
use blindqc::seed::{rng_from_seed, splitmix64, trial_rng, trial_seed};
use blindqc::ubqc::{run_ubqc, FixedReport, HonestServer, Preparation, RandomReport, ServerBehavior};
use blindqc::{plus_state, Angle8};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BlindnessConfig, BoundTableConfig, I1dcConfig, RbspMcConfig, RunUbqcConfig, ServerConfig};
use crate::stats::{BoundTest, RateEstimate};
use crate::{HarnessError, HarnessResult, Verdict};

/// Largest pattern for which the exact plain distribution is enumerated.
const EXACT_ENUMERATION_LIMIT: usize = 10;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> HarnessResult<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_err(&path))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> HarnessResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn write_summary<T: Serialize>(out: Option<&Path>, report: &T) -> HarnessResult<()> {
    if let Some(dir) = out {
        write_file(dir, "summary.json", &to_json(report)?)?;
    }
    Ok(())
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn check_trials(trials: u64) -> HarnessResult<()> {
    if trials == 0 {
        return Err(HarnessError::Config("trials must be >= 1".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub output: String,
    pub estimate: RateEstimate,
}

fn histogram(counts: &BTreeMap<Vec<bool>, u64>, total: u64) -> Vec<HistogramBin> {
    counts
        .iter()
        .map(|(k, &c)| HistogramBin {
            output: bit_string(k),
            estimate: RateEstimate::new(c, total),
        })
        .collect()
}

fn total_variation(a: &BTreeMap<Vec<bool>, f64>, b: &BTreeMap<Vec<bool>, f64>) -> f64 {
    let mut keys: Vec<&Vec<bool>> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

fn normalise(counts: &BTreeMap<Vec<bool>, u64>) -> BTreeMap<Vec<bool>, f64> {
    let total: u64 = counts.values().sum();
    counts
        .iter()
        .map(|(k, &c)| (k.clone(), c as f64 / total.max(1) as f64))
        .collect()
}

// ---------------------------------------------------------------- run-ubqc

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactBin {
    pub output: String,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlainComparison {
    pub plain_trials: u64,
    pub plain_outputs: Vec<HistogramBin>,
    /// Exact plain distribution, for patterns small enough to enumerate.
    pub exact_plain: Option<Vec<ExactBin>>,
    pub tv_blind_vs_plain: f64,
    pub tv_blind_vs_exact: Option<f64>,
    pub tv_tolerance: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunUbqcReport {
    pub command: &'static str,
    pub config: RunUbqcConfig,
    pub size: usize,
    pub pulses_per_qubit: Option<u64>,
    pub aborts: RateEstimate,
    /// Honest remote preparation: aborts tested against
    /// `min(1, S exp(-N T^4 / 18))`.
    pub robustness: Option<BoundTest>,
    pub completed: u64,
    pub outputs: Vec<HistogramBin>,
    pub compare_plain: Option<PlainComparison>,
    pub verdict: Verdict,
}

fn server_for(config: ServerConfig, seed: u64) -> Box<dyn ServerBehavior> {
    match config {
        ServerConfig::Honest => Box::new(HonestServer),
        ServerConfig::Constant(b) => Box::new(FixedReport(b)),
        ServerConfig::Random => Box::new(RandomReport::from_seed(splitmix64(seed))),
    }
}

pub fn cmd_run_ubqc(config: &RunUbqcConfig, out: Option<&Path>) -> HarnessResult<RunUbqcReport> {
    check_trials(config.trials)?;
    let pattern = BrickworkPattern::from_spec(&config.resolve_pattern()?)?;
    let size = pattern.size();
    let rbsp = config.preparation.rbsp_params(size as u64)?;
    let preparation = match rbsp {
        Some(p) => Preparation::Rbsp(p),
        None => Preparation::Ideal,
    };

    let runs = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(config.seed, i);
            let mut server = server_for(config.server, seed);
            run_ubqc(&pattern, server.as_mut(), &preparation, seed)
        })
        .collect::<blindqc::Result<Vec<_>>>()?;

    if let Some(dir) = out {
        let tdir = dir.join("transcripts");
        for (i, run) in runs.iter().enumerate().take(config.transcripts as usize) {
            write_file(&tdir, &format!("trial_{i:05}.jsonl"), &run.transcript.to_jsonl())?;
        }
    }

    let mut counts: BTreeMap<Vec<bool>, u64> = BTreeMap::new();
    let mut aborted = 0u64;
    for run in &runs {
        match &run.result {
            Some(r) => *counts.entry(r.corrected_outputs.clone()).or_insert(0) += 1,
            None => aborted += 1,
        }
    }
    let completed = config.trials - aborted;

    let robustness = match rbsp {
        Some(p) if p.strategy == ServerStrategy::Honest => {
            let bound = (size as f64 * fail_abort_bound(p.pulses, p.channel.transmittance)).min(1.0);
            Some(BoundTest::new(aborted, config.trials, bound))
        }
        _ => None,
    };

    let compare_plain = if config.compare_plain {
        Some(compare_with_plain(config, &pattern, &counts)?)
    } else {
        None
    };

    let mut verdicts = Vec::new();
    verdicts.extend(robustness.as_ref().map(|t| t.verdict));
    verdicts.extend(compare_plain.as_ref().map(|c| c.verdict));
    let report = RunUbqcReport {
        command: "run-ubqc",
        config: config.clone(),
        size,
        pulses_per_qubit: rbsp.map(|p| p.pulses),
        aborts: RateEstimate::new(aborted, config.trials),
        robustness,
        completed,
        outputs: histogram(&counts, completed.max(1)),
        compare_plain,
        verdict: Verdict::all(verdicts),
    };
    write_summary(out, &report)?;
    Ok(report)
}

fn compare_with_plain(
    config: &RunUbqcConfig,
    pattern: &BrickworkPattern,
    blind_counts: &BTreeMap<Vec<bool>, u64>,
) -> HarnessResult<PlainComparison> {
    // Plain runs draw from a stream disjoint from the blind trials.
    let plain_master = splitmix64(config.seed ^ 0x706C_6169_6E00_0000);
    let outputs = (0..config.trials)
        .into_par_iter()
        .map(|i| run_plain_mbqc(pattern, &mut trial_rng(plain_master, i)).map(|r| r.corrected_outputs))
        .collect::<blindqc::Result<Vec<_>>>()?;
    let mut plain_counts: BTreeMap<Vec<bool>, u64> = BTreeMap::new();
    for o in outputs {
        *plain_counts.entry(o).or_insert(0) += 1;
    }
    let blind = normalise(blind_counts);
    let plain = normalise(&plain_counts);
    let exact = if pattern.size() <= EXACT_ENUMERATION_LIMIT {
        Some(plain_output_distribution(pattern)?)
    } else {
        None
    };
    let tv_blind_vs_plain = total_variation(&blind, &plain);
    Ok(PlainComparison {
        plain_trials: config.trials,
        plain_outputs: histogram(&plain_counts, config.trials),
        exact_plain: exact.as_ref().map(|d| {
            d.iter()
                .map(|(k, &p)| ExactBin {
                    output: bit_string(k),
                    probability: p,
                })
                .collect()
        }),
        tv_blind_vs_plain,
        tv_blind_vs_exact: exact.as_ref().map(|d| total_variation(&blind, d)),
        tv_tolerance: config.tv_tolerance,
        verdict: Verdict::from_bool(tv_blind_vs_plain <= config.tv_tolerance),
    })
}

// ---------------------------------------------------------------- rbsp-mc

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RbspMcReport {
    pub command: &'static str,
    pub config: RbspMcConfig,
    pub trials: u64,
    pub seed: u64,
    /// `exp(-N T^4 / 18)`.
    pub bound: f64,
    /// `exp(-2 Δ² N)` at `Δ = T² / 6`.
    pub hoeffding_bound: f64,
    pub vacuum_threshold: f64,
    pub mean_declared_zeros: f64,
    pub aborts: RateEstimate,
    pub fails: RateEstimate,
    pub fail_not_aborted: RateEstimate,
    /// Honest: aborts, then undetected failures. Dishonest: undetected
    /// failures only.
    pub tests: Vec<NamedTest>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedTest {
    pub name: &'static str,
    pub test: BoundTest,
}

pub fn cmd_rbsp_montecarlo(config: &RbspMcConfig, out: Option<&Path>) -> HarnessResult<RbspMcReport> {
    check_trials(config.trials)?;
    let params = config.params()?;
    let t = config.transmittance;
    let samples = (0..config.trials)
        .into_par_iter()
        .map(|i| run_rbsp(&params, &mut trial_rng(config.seed, i)).map(|o| (o.aborted, o.fail_event, o.declared_zeros)))
        .collect::<blindqc::Result<Vec<_>>>()?;

    if let (Some(dir), true) = (out, config.per_trial_csv) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "seed", "aborted", "fail_event", "declared_zeros"])?;
        for (i, (aborted, fail, zeros)) in samples.iter().enumerate() {
            let seed = trial_seed(config.seed, i as u64);
            w.serialize((i, seed, aborted, fail, zeros))?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))?;
        write_file(
            dir,
            "trials.csv",
            &String::from_utf8(bytes).expect("csv output is UTF-8"),
        )?;
    }

    let aborts = samples.iter().filter(|s| s.0).count() as u64;
    let fails = samples.iter().filter(|s| s.1).count() as u64;
    let undetected = samples.iter().filter(|s| !s.0 && s.1).count() as u64;
    let zeros: u64 = samples.iter().map(|s| s.2).sum();

    let bound = fail_abort_bound(config.pulses, t);
    let mut tests = Vec::new();
    if config.strategy == ServerStrategy::Honest {
        tests.push(NamedTest {
            name: "abort",
            test: BoundTest::new(aborts, config.trials, bound),
        });
    }
    tests.push(NamedTest {
        name: "fail_not_aborted",
        test: BoundTest::new(undetected, config.trials, bound),
    });

    let report = RbspMcReport {
        command: "rbsp-mc",
        config: config.clone(),
        trials: config.trials,
        seed: config.seed,
        bound,
        hoeffding_bound: hoeffding_abort_bound(config.pulses, t * t / 6.0),
        vacuum_threshold: vacuum_threshold(config.pulses, t),
        mean_declared_zeros: zeros as f64 / config.trials as f64,
        aborts: RateEstimate::new(aborts, config.trials),
        fails: RateEstimate::new(fails, config.trials),
        fail_not_aborted: RateEstimate::new(undetected, config.trials),
        verdict: Verdict::all(tests.iter().map(|t| t.test.verdict)),
        tests,
    };
    write_summary(out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- bound-table

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub size: u64,
    pub epsilon: f64,
    pub transmittance: f64,
    pub pulses: u64,
    pub per_qubit_bound: f64,
    pub total_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundTableReport {
    pub command: &'static str,
    pub config: BoundTableConfig,
    pub rows: Vec<BoundRow>,
    /// Largest `total_bound / epsilon` over all rows.
    pub max_ratio: f64,
    pub verdict: Verdict,
}

pub fn bound_rows(config: &BoundTableConfig) -> HarnessResult<Vec<BoundRow>> {
    if config.sizes.is_empty() || config.epsilons.is_empty() || config.transmittances.is_empty() {
        return Err(HarnessError::Config("bound table grids must be non-empty".into()));
    }
    let mut rows = Vec::new();
    for &size in &config.sizes {
        for &epsilon in &config.epsilons {
            for &transmittance in &config.transmittances {
                let pulses = required_pulses(size, epsilon, transmittance)?;
                let per_qubit_bound = fail_abort_bound(pulses, transmittance);
                rows.push(BoundRow {
                    size,
                    epsilon,
                    transmittance,
                    pulses,
                    per_qubit_bound,
                    total_bound: size as f64 * per_qubit_bound,
                });
            }
        }
    }
    Ok(rows)
}

pub fn bound_table_csv(rows: &[BoundRow]) -> HarnessResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn cmd_bound_table(config: &BoundTableConfig, out: Option<&Path>) -> HarnessResult<BoundTableReport> {
    let rows = bound_rows(config)?;
    if let Some(dir) = out {
        write_file(dir, "bound_table.csv", &bound_table_csv(&rows)?)?;
    }
    let max_ratio = rows.iter().map(|r| r.total_bound / r.epsilon).fold(0.0, f64::max);
    let report = BoundTableReport {
        command: "bound-table",
        config: config.clone(),
        verdict: Verdict::from_bool(rows.iter().all(|r| r.total_bound <= r.epsilon)),
        rows,
        max_ratio,
    };
    write_summary(out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- blindness-check

/// Slack for comparing exact distances with certified values.
const EXACT_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiIndependence {
    pub assignments_checked: usize,
    /// Largest server-marginal distance from the all-zero assignment.
    pub max_marginal_distance: f64,
    /// Two certified ε: each marginal is within ε of the same ideal one.
    pub allowed: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlindnessReport {
    pub command: &'static str,
    pub config: BlindnessConfig,
    pub map: CptpMap,
    pub epsilon_prep: f64,
    pub certified_epsilon: f64,
    /// Exact distance between the joint state and the ideal family member
    /// at `map`, uniform prior.
    pub joint_distance: f64,
    pub joint_verdict: Verdict,
    pub phi_independence: PhiIndependence,
    pub verdict: Verdict,
}

/// Assignments compared in the φ-independence test. All of them when the
/// per-position state is a qubit; otherwise a fixed spread of four.
fn phi_assignments(size: usize, qubit_model: bool) -> Vec<Vec<Angle8>> {
    let all: Vec<Vec<Angle8>> = (0..8usize.pow(size as u32))
        .map(|code| (0..size).map(|i| Angle8::new(((code >> (3 * i)) & 7) as i64)).collect())
        .collect();
    if qubit_model || size == 1 {
        all
    } else {
        [0usize, 1, 4, 7]
            .iter()
            .map(|&k| (0..size).map(|i| Angle8::new((k * (i + 1)) as i64)).collect())
            .collect()
    }
}

pub fn cmd_blindness_check(config: &BlindnessConfig, out: Option<&Path>) -> HarnessResult<BlindnessReport> {
    let size = config.size;
    let prep = &config.preparation;
    let map = config.effective_map();
    // Validates the size before any expensive work.
    let uniform = Prior::uniform(size)?;
    let eps = epsilon_prep(prep, &map)?;
    let certified = certified_epsilon(size as u64, prep, &map)?;

    let actual = build_joint_state(size, prep, &uniform)?;
    let ideal = build_joint_state(size, &PreparationModel::Mapped(map.clone()), &uniform)?;
    let joint_distance = joint_trace_distance(&actual, &ideal)?;

    let qubit_model = prep.dim()? == 2;
    let assignments = phi_assignments(size, qubit_model);
    let reference = build_joint_state(size, prep, &Prior::point(&assignments[0])?)?;
    let distances = assignments[1..]
        .par_iter()
        .map(|phi| {
            let other = build_joint_state(size, prep, &Prior::point(phi)?)?;
            marginal_trace_distance(&reference, &other)
        })
        .collect::<blindqc::Result<Vec<f64>>>()?;
    let max_marginal_distance = distances.into_iter().fold(0.0, f64::max);
    let allowed = 2.0 * certified;

    let joint_verdict = Verdict::from_bool(joint_distance <= certified + EXACT_SLACK);
    let phi_independence = PhiIndependence {
        assignments_checked: assignments.len(),
        max_marginal_distance,
        allowed,
        verdict: Verdict::from_bool(max_marginal_distance <= allowed + EXACT_SLACK),
    };
    let report = BlindnessReport {
        command: "blindness-check",
        config: config.clone(),
        map,
        epsilon_prep: eps,
        certified_epsilon: certified,
        joint_distance,
        joint_verdict,
        verdict: Verdict::all([joint_verdict, phi_independence.verdict]),
        phi_independence,
    };
    write_summary(out, &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- i1dc-test

/// Smallest acceptable fidelity with `|+_θ>`.
pub const FIDELITY_THRESHOLD: f64 = 1.0 - 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExhaustiveResult {
    pub length: usize,
    pub assignments: u64,
    pub branches: u64,
    pub min_fidelity: f64,
    /// Largest deviation of summed branch probabilities from 1.
    pub max_mass_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct I1dcReport {
    pub command: &'static str,
    pub config: I1dcConfig,
    pub exhaustive: Vec<ExhaustiveResult>,
    pub random_min_fidelity: f64,
    pub fidelity_threshold: f64,
    pub verdict: Verdict,
}

fn exhaustive_chain(length: usize) -> HarnessResult<ExhaustiveResult> {
    if length == 0 || length > 6 {
        return Err(HarnessError::Config(format!(
            "exhaustive chain length {length} outside 1..=6"
        )));
    }
    let assignments = 8u64.pow(length as u32);
    let per = (0..assignments)
        .into_par_iter()
        .map(|code| -> blindqc::Result<(u64, f64, f64)> {
            let sigmas: Vec<Angle8> = (0..length)
                .map(|i| Angle8::new(((code >> (3 * i)) & 7) as i64))
                .collect();
            let mut branches = 0;
            let mut mass = 0.0;
            let mut min_f = 1.0f64;
            for b in 0..(1u64 << (length - 1)) {
                let s: Vec<bool> = (0..length - 1).map(|i| (b >> i) & 1 == 1).collect();
                let Some((state, p)) = run_i1dc_forced(&sigmas, &s)? else {
                    continue;
                };
                branches += 1;
                mass += p;
                let theta = client_theta(&sigmas, &t_from_s(&s))?;
                min_f = min_f.min(fidelity(&state, &plus_state(theta))?);
            }
            Ok((branches, min_f, (mass - 1.0).abs()))
        })
        .collect::<blindqc::Result<Vec<_>>>()?;
    Ok(ExhaustiveResult {
        length,
        assignments,
        branches: per.iter().map(|p| p.0).sum(),
        min_fidelity: per.iter().map(|p| p.1).fold(1.0, f64::min),
        max_mass_error: per.iter().map(|p| p.2).fold(0.0, f64::max),
    })
}

pub fn cmd_i1dc_test(config: &I1dcConfig, out: Option<&Path>) -> HarnessResult<I1dcReport> {
    if config.max_length == 0 {
        return Err(HarnessError::Config("max_length must be >= 1".into()));
    }
    let exhaustive = config
        .exhaustive_lengths
        .iter()
        .map(|&k| exhaustive_chain(k))
        .collect::<HarnessResult<Vec<_>>>()?;
    let random = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(trial_seed(config.seed, i));
            let k = rng.random_range(1..=config.max_length);
            let sigmas: Vec<Angle8> = (0..k).map(|_| Angle8::new(rng.random_range(0..8))).collect();
            let r = run_i1dc(&sigmas, &mut rng)?;
            let theta = client_theta(&sigmas, &r.t_bits)?;
            fidelity(&r.final_state, &plus_state(theta))
        })
        .collect::<blindqc::Result<Vec<f64>>>()?;
    let random_min_fidelity = random.into_iter().fold(1.0, f64::min);
    let ok = random_min_fidelity >= FIDELITY_THRESHOLD
        && exhaustive
            .iter()
            .all(|e| e.min_fidelity >= FIDELITY_THRESHOLD && e.max_mass_error < 1e-9);
    let report = I1dcReport {
        command: "i1dc-test",
        config: config.clone(),
        exhaustive,
        random_min_fidelity,
        fidelity_threshold: FIDELITY_THRESHOLD,
        verdict: Verdict::from_bool(ok),
    };
    write_summary(out, &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PrepConfig;
    use blindqc::mbqc::PatternSpec;

    #[test]
    fn total_variation_examples() {
        let a: BTreeMap<Vec<bool>, f64> = [(vec![false], 1.0)].into();
        let b: BTreeMap<Vec<bool>, f64> = [(vec![true], 1.0)].into();
        assert_eq!(total_variation(&a, &b), 1.0);
        assert_eq!(total_variation(&a, &a), 0.0);
    }

    #[test]
    fn bound_rows_close() {
        let rows = bound_rows(&BoundTableConfig::default()).unwrap();
        assert_eq!(rows.len(), 4 * 3 * 5);
        assert!(rows.iter().all(|r| r.total_bound <= r.epsilon));
        let one = bound_rows(&BoundTableConfig {
            sizes: vec![100],
            epsilons: vec![1e-6],
            transmittances: vec![0.5],
        })
        .unwrap();
        assert_eq!(one[0].pulses, 5306);
    }

    #[test]
    fn halving_epsilon_adds_log_two_term() {
        let rows = bound_rows(&BoundTableConfig {
            sizes: vec![10],
            epsilons: vec![1e-3, 5e-4],
            transmittances: vec![0.5],
        })
        .unwrap();
        let step = 18.0 * std::f64::consts::LN_2 / 0.5f64.powi(4);
        let diff = rows[1].pulses as f64 - rows[0].pulses as f64;
        assert!((diff - step).abs() <= 1.0, "{diff} vs {step}");
    }

    #[test]
    fn bound_table_rejects_empty_grid() {
        let c = BoundTableConfig {
            sizes: vec![],
            ..BoundTableConfig::default()
        };
        assert!(bound_rows(&c).is_err());
    }

    #[test]
    fn blindness_examples() {
        let ideal = cmd_blindness_check(&BlindnessConfig::default(), None).unwrap();
        assert!(ideal.certified_epsilon < 1e-12 && ideal.verdict.is_pass());
        assert!(ideal.phi_independence.max_marginal_distance < 1e-12);

        let depol = BlindnessConfig {
            preparation: PreparationModel::Depolarized { q: 0.2 },
            ..BlindnessConfig::default()
        };
        let r = cmd_blindness_check(&depol, None).unwrap();
        assert!((r.certified_epsilon - 0.1).abs() < 1e-9);
        assert!(r.verdict.is_pass());

        let too_big = BlindnessConfig {
            size: 3,
            ..BlindnessConfig::default()
        };
        let err = cmd_blindness_check(&too_big, None).unwrap_err().to_string();
        assert!(err.contains("per-qubit bound"), "{err}");
    }

    #[test]
    fn small_run_is_reproducible() {
        let config = RunUbqcConfig {
            pattern: PatternSpec {
                n: 2,
                m: 1,
                phi: vec![2, 5],
            },
            trials: 64,
            compare_plain: true,
            ..RunUbqcConfig::default()
        };
        let a = cmd_run_ubqc(&config, None).unwrap();
        let b = cmd_run_ubqc(&config, None).unwrap();
        assert_eq!(to_json(&a).unwrap(), to_json(&b).unwrap());
        assert_eq!(a.completed, 64);
    }

    #[test]
    fn rbsp_run_reports_robustness() {
        let config = RunUbqcConfig {
            preparation: PrepConfig::Rbsp {
                transmittance: 0.5,
                source_mean: None,
                pulses: None,
                epsilon: Some(0.01),
                strategy: ServerStrategy::Honest,
            },
            trials: 16,
            ..RunUbqcConfig::default()
        };
        let r = cmd_run_ubqc(&config, None).unwrap();
        assert!(r.robustness.is_some());
        assert_eq!(r.pulses_per_qubit, Some(required_pulses(2, 0.01, 0.5).unwrap()));
    }

    #[test]
    fn i1dc_small_run() {
        let r = cmd_i1dc_test(
            &I1dcConfig {
                exhaustive_lengths: vec![2],
                trials: 20,
                ..I1dcConfig::default()
            },
            None,
        )
        .unwrap();
        assert!(r.verdict.is_pass());
        assert_eq!(r.exhaustive[0].branches, 64 * 2);
    }
}
