//! Experiment harness: end-to-end protocol runs, Monte Carlo campaigns over
//! remote preparation, bound tables and exact blindness checks.
//!
//! Every command takes a JSON configuration, derives per-trial seeds from one
//! master seed and writes a JSON summary (plus transcripts or CSV where
//! relevant). Re-running a configuration reproduces its files byte for byte.

pub mod commands;
pub mod config;
pub mod stats;

use std::path::PathBuf;

use serde::Serialize;

/// Harness failures that are not verdicts.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] blindqc::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

/// Outcome of a statistical or exact check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    /// `Pass` iff every verdict passes.
    pub fn all(verdicts: impl IntoIterator<Item = Verdict>) -> Self {
        Verdict::from_bool(verdicts.into_iter().all(Verdict::is_pass))
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}
