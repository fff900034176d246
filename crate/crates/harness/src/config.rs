//! Per-command configuration files.
//!
//! Every field has a default, so an empty object `{}` is a valid
//! configuration for each command. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use blindqc::analysis::{CptpMap, PreparationModel};
use blindqc::mbqc::PatternSpec;
use blindqc::rbsp::{required_pulses, ChannelAccess, ChannelModel, RbspParams, ServerStrategy};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{HarnessError, HarnessResult};

pub const DEFAULT_SEED: u64 = 0x5EED;

/// Values given on the command line; they replace the file's values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub compare_plain: bool,
}

/// Reads a JSON config, or the defaults when `path` is `None`.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> HarnessResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| HarnessError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))
        }
    }
}

/// How qubits are prepared in an end-to-end run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrepConfig {
    Ideal,
    Rbsp {
        transmittance: f64,
        /// Defaults to the transmittance.
        #[serde(default)]
        source_mean: Option<f64>,
        /// Pulses per qubit; derived from `epsilon` when absent.
        #[serde(default)]
        pulses: Option<u64>,
        #[serde(default)]
        epsilon: Option<f64>,
        #[serde(default = "honest")]
        strategy: ServerStrategy,
    },
}

fn honest() -> ServerStrategy {
    ServerStrategy::Honest
}

pub const DEFAULT_EPSILON: f64 = 0.01;

impl PrepConfig {
    /// Channel, pulse count and strategy for a computation of `size` qubits.
    pub fn rbsp_params(&self, size: u64) -> HarnessResult<Option<RbspParams>> {
        match *self {
            PrepConfig::Ideal => Ok(None),
            PrepConfig::Rbsp {
                transmittance,
                source_mean,
                pulses,
                epsilon,
                strategy,
            } => {
                let channel = ChannelModel::with_source_mean(transmittance, source_mean.unwrap_or(transmittance))?;
                let pulses = match pulses {
                    Some(n) => n,
                    None => required_pulses(size, epsilon.unwrap_or(DEFAULT_EPSILON), transmittance)?,
                };
                Ok(Some(RbspParams::new(pulses, channel, strategy)))
            }
        }
    }
}

/// Reporting behaviour of the server during the interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServerConfig {
    Honest,
    Constant(bool),
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunUbqcConfig {
    pub pattern: PatternSpec,
    /// JSON file holding `{"n", "m", "phi"}`; replaces `pattern` when set.
    pub pattern_file: Option<PathBuf>,
    pub preparation: PrepConfig,
    pub server: ServerConfig,
    pub trials: u64,
    pub seed: u64,
    pub compare_plain: bool,
    /// Largest acceptable total-variation distance for `compare_plain`.
    pub tv_tolerance: f64,
    /// Number of leading trials whose transcripts are written out.
    pub transcripts: u64,
}

impl Default for RunUbqcConfig {
    fn default() -> Self {
        RunUbqcConfig {
            pattern: PatternSpec {
                n: 2,
                m: 1,
                phi: vec![0, 0],
            },
            pattern_file: None,
            preparation: PrepConfig::Ideal,
            server: ServerConfig::Honest,
            trials: 1,
            seed: DEFAULT_SEED,
            compare_plain: false,
            tv_tolerance: 0.05,
            transcripts: 8,
        }
    }
}

impl RunUbqcConfig {
    /// The pattern to run, read from `pattern_file` when one is given.
    pub fn resolve_pattern(&self) -> HarnessResult<PatternSpec> {
        match &self.pattern_file {
            None => Ok(self.pattern.clone()),
            Some(path) => load::<PatternFile>(Some(path)).map(|f| f.0),
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        self.compare_plain |= o.compare_plain;
    }
}

#[derive(Deserialize)]
#[serde(transparent)]
struct PatternFile(PatternSpec);

impl Default for PatternFile {
    fn default() -> Self {
        PatternFile(RunUbqcConfig::default().pattern)
    }
}

/// `N`, `T`, `mu` and `master_seed` are accepted as aliases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RbspMcConfig {
    #[serde(alias = "N")]
    pub pulses: u64,
    #[serde(alias = "T")]
    pub transmittance: f64,
    /// Defaults to the transmittance.
    #[serde(alias = "mu")]
    pub source_mean: Option<f64>,
    pub strategy: ServerStrategy,
    pub malicious_channel: ChannelAccess,
    pub trials: u64,
    #[serde(alias = "master_seed")]
    pub seed: u64,
    /// Also write `trials.csv` with one row per trial.
    pub per_trial_csv: bool,
}

impl Default for RbspMcConfig {
    fn default() -> Self {
        RbspMcConfig {
            pulses: 2000,
            transmittance: 0.5,
            source_mean: None,
            strategy: ServerStrategy::Honest,
            malicious_channel: ChannelAccess::Lossless,
            trials: 10_000,
            seed: DEFAULT_SEED,
            per_trial_csv: false,
        }
    }
}

impl RbspMcConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
    }

    pub fn params(&self) -> HarnessResult<RbspParams> {
        let channel =
            ChannelModel::with_source_mean(self.transmittance, self.source_mean.unwrap_or(self.transmittance))?;
        let mut p = RbspParams::new(self.pulses, channel, self.strategy);
        p.malicious_channel = self.malicious_channel;
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundTableConfig {
    pub sizes: Vec<u64>,
    pub epsilons: Vec<f64>,
    pub transmittances: Vec<f64>,
}

impl Default for BoundTableConfig {
    fn default() -> Self {
        BoundTableConfig {
            sizes: vec![1, 10, 100, 1000],
            epsilons: vec![1e-2, 1e-4, 1e-6],
            transmittances: vec![0.1, 0.25, 0.5, 0.75, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlindnessConfig {
    pub size: usize,
    pub preparation: PreparationModel,
    /// The fixed map `E`; defaults to flag-appending for the remote
    /// preparation model and the identity otherwise.
    pub map: Option<CptpMap>,
}

impl Default for BlindnessConfig {
    fn default() -> Self {
        BlindnessConfig {
            size: 1,
            preparation: PreparationModel::ideal(),
            map: None,
        }
    }
}

impl BlindnessConfig {
    pub fn effective_map(&self) -> CptpMap {
        match (&self.map, &self.preparation) {
            (Some(m), _) => m.clone(),
            (None, PreparationModel::RbspWorstCase { .. }) => CptpMap::AppendFlag,
            (None, _) => CptpMap::Identity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct I1dcConfig {
    /// Chain lengths checked over every angle assignment and branch.
    pub exhaustive_lengths: Vec<usize>,
    /// Random chains with lengths drawn from `1..=max_length`.
    pub trials: u64,
    pub max_length: usize,
    pub seed: u64,
}

impl Default for I1dcConfig {
    fn default() -> Self {
        I1dcConfig {
            exhaustive_lengths: vec![2, 3],
            trials: 1000,
            max_length: 10,
            seed: DEFAULT_SEED,
        }
    }
}

impl I1dcConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
    }
}
