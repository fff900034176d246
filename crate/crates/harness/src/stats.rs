//! Exact binomial tests and Clopper–Pearson intervals.

use serde::Serialize;
use statrs::distribution::{Beta, Binomial, ContinuousCDF, DiscreteCDF};

use crate::Verdict;

/// Significance of every one-sided test the harness runs.
pub const SIGNIFICANCE: f64 = 1e-3;

/// An empirical rate with its two-sided Clopper–Pearson interval at
/// confidence `1 - SIGNIFICANCE`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateEstimate {
    pub events: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub confidence: f64,
}

impl RateEstimate {
    pub fn new(events: u64, trials: u64) -> Self {
        assert!(events <= trials && trials > 0, "need 0 <= events <= trials, trials > 0");
        let (ci_lower, ci_upper) = clopper_pearson(events, trials, SIGNIFICANCE);
        RateEstimate {
            events,
            trials,
            rate: events as f64 / trials as f64,
            ci_lower,
            ci_upper,
            confidence: 1.0 - SIGNIFICANCE,
        }
    }
}

/// Two-sided Clopper–Pearson interval with total miss probability `alpha`.
pub fn clopper_pearson(events: u64, trials: u64, alpha: f64) -> (f64, f64) {
    let k = events as f64;
    let n = trials as f64;
    let lower = if events == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).expect("valid beta").inverse_cdf(alpha / 2.0)
    };
    let upper = if events == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .expect("valid beta")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (lower, upper)
}

/// `P(X >= events)` for `X ~ Binomial(trials, rate)`.
pub fn binomial_upper_tail(events: u64, trials: u64, rate: f64) -> f64 {
    if events == 0 {
        return 1.0;
    }
    let rate = rate.clamp(0.0, 1.0);
    let dist = Binomial::new(rate, trials).expect("rate clamped to [0, 1]");
    dist.sf(events - 1)
}

/// One-sided exact binomial test of "true rate <= bound".
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundTest {
    pub bound: f64,
    pub estimate: RateEstimate,
    /// `P(X >= events)` with the rate set to the bound.
    pub p_value: f64,
    pub significance: f64,
    pub verdict: Verdict,
}

impl BoundTest {
    pub fn new(events: u64, trials: u64, bound: f64) -> Self {
        let p_value = binomial_upper_tail(events, trials, bound);
        BoundTest {
            bound,
            estimate: RateEstimate::new(events, trials),
            p_value,
            significance: SIGNIFICANCE,
            verdict: Verdict::from_bool(p_value >= SIGNIFICANCE),
        }
    }
}
