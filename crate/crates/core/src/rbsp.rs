//! Remote blind qubit state preparation from weak coherent pulses.
//!
//! The client sends `N` phase-randomised pulses with uniformly random
//! polarisations `σ_l`. The server measures each photon number, declares the
//! counts, and the client aborts when more than `N (e^{-T²} + T²/6)` vacua are
//! declared. Otherwise the server chains one qubit per declared non-empty
//! pulse through the interlaced 1-D cluster and reports the parities `t`, from
//! which the client computes `θ`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{classical_angle_state, embed_qubit_density, FLAG_DIM};
use crate::i1dc::{client_theta, run_i1dc_states};
use crate::linalg::{basis_projector, DensityMatrix};
use crate::qsim::{plus_state, pure_to_density, PureState};
use crate::{Angle8, Error, Result};

/// Lossy channel with transmittance lower bound `T` fed by a source of mean
/// photon number `μ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub transmittance: f64,
    pub source_mean: f64,
}

impl ChannelModel {
    /// Channel with the source mean set to `μ = T`.
    pub fn new(transmittance: f64) -> Result<Self> {
        ChannelModel::with_source_mean(transmittance, transmittance)
    }

    pub fn with_source_mean(transmittance: f64, source_mean: f64) -> Result<Self> {
        if !(transmittance > 0.0 && transmittance <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "transmittance {transmittance} not in (0, 1]"
            )));
        }
        if !(source_mean > 0.0 && source_mean.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "source mean {source_mean} must be positive"
            )));
        }
        Ok(ChannelModel {
            transmittance,
            source_mean,
        })
    }

    /// Mean photon number reaching the server, `T μ`.
    pub fn received_mean(&self) -> f64 {
        self.transmittance * self.source_mean
    }
}

/// Inverse-CDF Poisson draw from a uniform `u ∈ [0, 1)`.
pub fn poisson_inverse_cdf(mean: f64, u: f64) -> u64 {
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u >= cdf {
        k += 1;
        p *= mean / k as f64;
        if p <= 0.0 {
            break;
        }
        cdf += p;
    }
    k
}

/// Photons reaching the server through the lossy channel: Poisson(`T μ`).
pub fn sample_received_count(channel: &ChannelModel, rng: &mut impl Rng) -> u64 {
    poisson_inverse_cdf(channel.received_mean(), rng.random::<f64>())
}

/// Photons at the source, i.e. what a server that replaced the channel by a
/// lossless one receives: Poisson(`μ`).
pub fn sample_source_count(channel: &ChannelModel, rng: &mut impl Rng) -> u64 {
    poisson_inverse_cdf(channel.source_mean, rng.random::<f64>())
}

/// Vacuum-count threshold `N (e^{-T²} + T²/6)`.
pub fn vacuum_threshold(pulses: u64, transmittance: f64) -> f64 {
    let t2 = transmittance * transmittance;
    pulses as f64 * ((-t2).exp() + t2 / 6.0)
}

/// Abort iff strictly more than the threshold number of vacua were declared.
pub fn vacuum_abort_test(pulses: u64, transmittance: f64, reported_zero_count: u64) -> bool {
    reported_zero_count as f64 > vacuum_threshold(pulses, transmittance)
}

/// `N = ⌈18 ln(S/ε) / T⁴⌉`, the pulse count giving ε-blindness and
/// ε-robustness over `S` preparations.
pub fn required_pulses(size: u64, epsilon: f64, transmittance: f64) -> Result<u64> {
    if size == 0 {
        return Err(Error::InvalidParameter("computation size must be >= 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0, 1)")));
    }
    if !(transmittance > 0.0 && transmittance <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "transmittance {transmittance} not in (0, 1]"
        )));
    }
    let n = 18.0 * (size as f64 / epsilon).ln() / transmittance.powi(4);
    Ok(n.ceil().max(1.0) as u64)
}

/// Declares `0` for zero or one detected photon and the truth otherwise.
pub fn strategy_suppress_singles(true_count: u64) -> u64 {
    if true_count <= 1 {
        0
    } else {
        true_count
    }
}

/// Memoryless photon-number declaration policy of the server.
pub trait DeclarationStrategy {
    /// `sigma` is revealed for multi-photon pulses only.
    fn declare(&mut self, true_count: u64, sigma: Option<Angle8>) -> u64;

    fn is_honest(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct HonestDeclaration;

impl DeclarationStrategy for HonestDeclaration {
    fn declare(&mut self, true_count: u64, _sigma: Option<Angle8>) -> u64 {
        true_count
    }

    fn is_honest(&self) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SuppressSingles;

impl DeclarationStrategy for SuppressSingles {
    fn declare(&mut self, true_count: u64, _sigma: Option<Angle8>) -> u64 {
        strategy_suppress_singles(true_count)
    }
}

/// Named server behaviours, as used in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServerStrategy {
    Honest,
    SuppressSingles,
}

impl ServerStrategy {
    pub fn declaration(self) -> Box<dyn DeclarationStrategy> {
        match self {
            ServerStrategy::Honest => Box::new(HonestDeclaration),
            ServerStrategy::SuppressSingles => Box::new(SuppressSingles),
        }
    }
}

/// Which channel a dishonest server receives through.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelAccess {
    /// The server replaced the channel by a lossless one.
    #[default]
    Lossless,
    Lossy,
}

/// Parameters of one preparation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbspParams {
    pub pulses: u64,
    pub channel: ChannelModel,
    pub strategy: ServerStrategy,
    #[serde(default)]
    pub malicious_channel: ChannelAccess,
}

impl RbspParams {
    pub fn new(pulses: u64, channel: ChannelModel, strategy: ServerStrategy) -> Self {
        RbspParams {
            pulses,
            channel,
            strategy,
            malicious_channel: ChannelAccess::Lossless,
        }
    }
}

/// One pulse as seen by both parties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub sigma: Angle8,
    pub true_count: u64,
    pub declared_count: u64,
}

/// Measured photon-number classes `(M_0, M_1, M_2)`: zero, one, two or more.
pub fn measured_classes(pulses: &[PulseRecord]) -> [u64; 3] {
    classes(pulses.iter().map(|p| p.true_count))
}

/// Declared photon-number classes `(N_0, N_1, N_2)`.
pub fn declared_classes(pulses: &[PulseRecord]) -> [u64; 3] {
    classes(pulses.iter().map(|p| p.declared_count))
}

fn classes(counts: impl Iterator<Item = u64>) -> [u64; 3] {
    let mut c = [0u64; 3];
    for k in counts {
        c[k.min(2) as usize] += 1;
    }
    c
}

/// Result of one preparation.
#[derive(Clone, Debug, PartialEq)]
pub struct RbspOutcome {
    pub aborted: bool,
    /// Client's angle; `None` iff aborted.
    pub theta_client: Option<Angle8>,
    /// The qubit left with the server; `None` iff aborted.
    pub server_qubit: Option<PureState>,
    /// Worst-case end state on the 9-dimensional register ⊗ success flag;
    /// `None` iff aborted.
    pub server_state: Option<DensityMatrix>,
    /// No pulse carried exactly one photon that was declared as one.
    pub fail_event: bool,
    pub pulses: Vec<PulseRecord>,
    pub declared_zeros: u64,
    /// Parities reported by the server; empty when aborted.
    pub t_bits: Vec<bool>,
}

/// Runs one preparation.
pub fn run_rbsp<R: Rng>(params: &RbspParams, rng: &mut R) -> Result<RbspOutcome> {
    let mut strategy = params.strategy.declaration();
    run_rbsp_with(
        params.pulses,
        &params.channel,
        strategy.as_mut(),
        params.malicious_channel,
        rng,
    )
}

/// Runs one preparation with an arbitrary declaration policy.
pub fn run_rbsp_with<R: Rng>(
    pulses: u64,
    channel: &ChannelModel,
    strategy: &mut dyn DeclarationStrategy,
    malicious_channel: ChannelAccess,
    rng: &mut R,
) -> Result<RbspOutcome> {
    if pulses == 0 {
        return Err(Error::InvalidParameter("RBSP needs N >= 1 pulses".into()));
    }
    let lossless = !strategy.is_honest() && malicious_channel == ChannelAccess::Lossless;
    let mut records = Vec::with_capacity(pulses as usize);
    for _ in 0..pulses {
        let sigma = Angle8::new(rng.random_range(0..8));
        let true_count = if lossless {
            sample_source_count(channel, rng)
        } else {
            sample_received_count(channel, rng)
        };
        let revealed = (true_count >= 2).then_some(sigma);
        let declared_count = strategy.declare(true_count, revealed);
        records.push(PulseRecord {
            sigma,
            true_count,
            declared_count,
        });
    }

    let declared_zeros = records.iter().filter(|p| p.declared_count == 0).count() as u64;
    let fail_event = !records.iter().any(|p| p.true_count == 1 && p.declared_count == 1);
    let aborted = vacuum_abort_test(pulses, channel.transmittance, declared_zeros);
    if aborted {
        return Ok(RbspOutcome {
            aborted,
            theta_client: None,
            server_qubit: None,
            server_state: None,
            fail_event,
            pulses: records,
            declared_zeros,
            t_bits: Vec::new(),
        });
    }

    let kept: Vec<&PulseRecord> = records.iter().filter(|p| p.declared_count > 0).collect();
    if kept.is_empty() {
        return Err(Error::Consistency(
            "every pulse declared empty but the vacuum test passed".into(),
        ));
    }
    let sigmas: Vec<Angle8> = kept.iter().map(|p| p.sigma).collect();
    // A pulse declared non-empty but actually empty gives the server nothing;
    // it chains a qubit of its own whose angle is unrelated to σ.
    let qubits = kept.iter().map(|p| {
        if p.true_count > 0 {
            plus_state(p.sigma)
        } else {
            plus_state(Angle8::ZERO)
        }
    });
    let chain = run_i1dc_states(qubits, rng)?;
    let theta = client_theta(&sigmas, &chain.t_bits)?;

    let server_state = if fail_event {
        classical_angle_state(theta).tensor(&flag(true))
    } else {
        embed_qubit_density(&pure_to_density(&chain.final_state))?.tensor(&flag(false))
    };

    Ok(RbspOutcome {
        aborted,
        theta_client: Some(theta),
        server_qubit: Some(chain.final_state),
        server_state: Some(server_state),
        fail_event,
        pulses: records,
        declared_zeros,
        t_bits: chain.t_bits,
    })
}

fn flag(failed: bool) -> DensityMatrix {
    DensityMatrix::new_unchecked(basis_projector(FLAG_DIM, usize::from(failed)))
}
