//! ε-blindness calculus.
//!
//! A run is summarised by the classical-quantum joint state
//!
//! ```text
//! Σ_{φ,r,θ} p(φ) / (2^S 8^S) ⊗_i |φ_i><φ_i| ⊗ |r_i><r_i| ⊗ ρ^{θ_i} ⊗ |δ_i><δ_i|,
//! δ_i = φ_i + θ_i + r_i π,
//! ```
//!
//! with the client's `(φ, r)` on one side and the server's prepared states and
//! `δ` on the other. Every register except `ρ^θ` is classical, so the state is
//! block diagonal in `(φ, r, δ)` and each block carries the product
//! `⊗_i ρ^{θ_i}` for the unique `θ` consistent with its key. Distances are
//! computed block by block; nothing above `S = 1` is ever expanded densely.
//!
//! The ideal family member for a fixed map `E` is the same construction with
//! `ρ^θ = E(|+_θ><+_θ|)`. No minimisation over maps is attempted; every
//! reported ε is an upper bound at the caller's chosen `E`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::linalg::{basis_projector, hermitian_eigenvalues, kron, trace_distance, ComplexMatrix, DensityMatrix};
use crate::qsim::{plus_state, pure_to_density};
use crate::ubqc::blind_angle;
use crate::{Angle8, Error, Result, C64};

/// Dimension of the register holding either the prepared qubit (on the span
/// of `|0>, |1>`) or the classical angle `|k>`.
pub const REGISTER_DIM: usize = 9;
/// Dimension of the success/failure flag register.
pub const FLAG_DIM: usize = 2;

/// Largest computation size for exact joint states.
pub const MAX_EXACT_SIZE: usize = 2;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Embeds a qubit density matrix into the span of `|0>, |1>` of the
/// 9-dimensional register.
pub fn embed_qubit_density(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 2,
        });
    }
    let mut m = ComplexMatrix::zeros(REGISTER_DIM, REGISTER_DIM);
    m.view_mut((0, 0), (2, 2)).copy_from(rho.matrix());
    Ok(DensityMatrix::new_unchecked(m))
}

/// `|θ><θ|` with `|θ> = |k>` for `θ = kπ/4`.
pub fn classical_angle_state(theta: Angle8) -> DensityMatrix {
    DensityMatrix::new_unchecked(basis_projector(REGISTER_DIM, theta.index() as usize))
}

fn flag(failed: bool) -> ComplexMatrix {
    basis_projector(FLAG_DIM, usize::from(failed))
}

/// A fixed completely positive trace-preserving map acting on the prepared
/// qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CptpMap {
    Identity,
    /// Embeds into the 9-dimensional register and appends the flag `|0>`.
    AppendFlag,
    /// `ρ ↦ Σ_j K_j ρ K_j†`, each `K_j` of shape `d_out × d_in`.
    Kraus(Vec<ComplexMatrix>),
}

impl CptpMap {
    /// Checks `Σ K_j† K_j = 1` for Kraus maps.
    pub fn validate(&self) -> Result<()> {
        if let CptpMap::Kraus(ops) = self {
            let first = ops.first().ok_or(Error::EmptyInput("Kraus operator set"))?;
            let d_in = first.ncols();
            let mut acc = ComplexMatrix::zeros(d_in, d_in);
            for k in ops {
                if k.ncols() != d_in || k.nrows() != first.nrows() {
                    return Err(Error::DimensionMismatch {
                        left: k.ncols(),
                        right: d_in,
                    });
                }
                acc += k.adjoint() * k;
            }
            let dev = (acc - ComplexMatrix::identity(d_in, d_in)).norm();
            if dev > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "Kraus operators are not trace preserving (deviation {dev:e})"
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match self {
            CptpMap::Identity => Ok(rho.clone()),
            CptpMap::AppendFlag => {
                let embedded = embed_qubit_density(rho)?;
                Ok(DensityMatrix::new_unchecked(kron(embedded.matrix(), &flag(false))))
            }
            CptpMap::Kraus(ops) => {
                self.validate()?;
                let d_out = ops[0].nrows();
                let mut acc = ComplexMatrix::zeros(d_out, d_out);
                for k in ops {
                    if k.ncols() != rho.dim() {
                        return Err(Error::DimensionMismatch {
                            left: k.ncols(),
                            right: rho.dim(),
                        });
                    }
                    acc += k * rho.matrix() * k.adjoint();
                }
                DensityMatrix::new(acc)
            }
        }
    }

    /// `E(|+_θ><+_θ|)`.
    pub fn apply_to_plus(&self, theta: Angle8) -> Result<DensityMatrix> {
        self.apply(&pure_to_density(&plus_state(theta)))
    }
}

/// `(1 - p) E^S(|+_θ><+_θ|) ⊗ |0><0| + p |θ><θ| ⊗ |1><1|` on the
/// 9-dimensional register ⊗ flag, with `E^S` the identity.
pub fn endstate_model(theta: Angle8, p_fail: f64) -> Result<DensityMatrix> {
    endstate_model_with(theta, p_fail, &CptpMap::Identity)
}

/// [`endstate_model`] with an explicit qubit map `E^S`, which must output a
/// qubit.
pub fn endstate_model_with(theta: Angle8, p_fail: f64, e_s: &CptpMap) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p_fail) {
        return Err(Error::InvalidParameter(format!("p_fail {p_fail} not in [0, 1]")));
    }
    let good = embed_qubit_density(&e_s.apply_to_plus(theta)?)?;
    let bad = classical_angle_state(theta);
    let m = kron(good.matrix(), &flag(false)) * c(1.0 - p_fail) + kron(bad.matrix(), &flag(true)) * c(p_fail);
    Ok(DensityMatrix::new_unchecked(m))
}

/// Per-angle prepared state `ρ^θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreparationModel {
    /// `ρ^θ = E(|+_θ><+_θ|)`; the identity map is perfect preparation.
    Mapped(CptpMap),
    /// Worst-case remote preparation end state with failure probability `p_fail`.
    RbspWorstCase { p_fail: f64 },
    /// `(1 - q) |+_θ><+_θ| + q 1/2`.
    Depolarized { q: f64 },
    /// Eight explicit states, indexed by `θ`.
    Explicit(Vec<DensityMatrix>),
}

impl PreparationModel {
    pub fn ideal() -> Self {
        PreparationModel::Mapped(CptpMap::Identity)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PreparationModel::Mapped(map) => map.validate(),
            PreparationModel::RbspWorstCase { p_fail } if !(0.0..=1.0).contains(p_fail) => {
                Err(Error::InvalidParameter(format!("p_fail {p_fail} not in [0, 1]")))
            }
            PreparationModel::Depolarized { q } if !(0.0..=1.0).contains(q) => {
                Err(Error::InvalidParameter(format!("q {q} not in [0, 1]")))
            }
            PreparationModel::Explicit(states) => {
                if states.len() != 8 {
                    return Err(Error::LengthMismatch {
                        left: states.len(),
                        right: 8,
                    });
                }
                let d = states[0].dim();
                if let Some(s) = states.iter().find(|s| s.dim() != d) {
                    return Err(Error::DimensionMismatch {
                        left: s.dim(),
                        right: d,
                    });
                }
                // Deserialised states bypass the constructor checks.
                for s in states {
                    DensityMatrix::new(s.matrix().clone())?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn state(&self, theta: Angle8) -> Result<DensityMatrix> {
        match self {
            PreparationModel::Mapped(map) => map.apply_to_plus(theta),
            PreparationModel::RbspWorstCase { p_fail } => endstate_model(theta, *p_fail),
            PreparationModel::Depolarized { q } => {
                let pure = pure_to_density(&plus_state(theta));
                let mixed = DensityMatrix::maximally_mixed(2);
                DensityMatrix::mixture(&[(1.0 - q, &pure), (*q, &mixed)])
            }
            PreparationModel::Explicit(states) => {
                self.validate()?;
                Ok(states[theta.index() as usize].clone())
            }
        }
    }

    /// Dimension of `ρ^θ`.
    pub fn dim(&self) -> Result<usize> {
        Ok(self.state(Angle8::ZERO)?.dim())
    }
}

/// `max_θ (1/2) ||ρ^θ - E(|+_θ><+_θ|)||`.
pub fn epsilon_prep(prep: &PreparationModel, map: &CptpMap) -> Result<f64> {
    prep.validate()?;
    let mut worst = 0.0f64;
    for theta in Angle8::all() {
        let d = trace_distance(&prep.state(theta)?, &map.apply_to_plus(theta)?)?;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// `S · ε_prep`.
pub fn blindness_bound(size: u64, eps_prep: f64) -> f64 {
    size as f64 * eps_prep
}

/// `exp(-2 Δ² N)`.
pub fn hoeffding_abort_bound(pulses: u64, delta: f64) -> f64 {
    (-2.0 * delta * delta * pulses as f64).exp()
}

/// `exp(-N T⁴ / 18)`, the bound on both the honest abort probability and the
/// failure probability of one preparation.
pub fn fail_abort_bound(pulses: u64, transmittance: f64) -> f64 {
    (-(pulses as f64) * transmittance.powi(4) / 18.0).exp()
}

/// `Δ̃ + Δ = e^{-μ} (1 + μ - e^{(1-T) μ})`.
pub fn delta_budget(transmittance: f64, source_mean: f64) -> f64 {
    (-source_mean).exp() * (1.0 + source_mean - ((1.0 - transmittance) * source_mean).exp())
}

/// Prior over computational-angle assignments, indexed by
/// `Σ_i φ_i.index() · 8^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    size: usize,
    probabilities: Vec<f64>,
}

impl Prior {
    pub fn uniform(size: usize) -> Result<Self> {
        check_size(size)?;
        let n = 8usize.pow(size as u32);
        Ok(Prior {
            size,
            probabilities: vec![1.0 / n as f64; n],
        })
    }

    pub fn point(phi: &[Angle8]) -> Result<Self> {
        check_size(phi.len())?;
        let mut p = vec![0.0; 8usize.pow(phi.len() as u32)];
        p[assignment_code(phi)] = 1.0;
        Ok(Prior {
            size: phi.len(),
            probabilities: p,
        })
    }

    pub fn from_probabilities(size: usize, probabilities: Vec<f64>) -> Result<Self> {
        check_size(size)?;
        let n = 8usize.pow(size as u32);
        if probabilities.len() != n {
            return Err(Error::LengthMismatch {
                left: probabilities.len(),
                right: n,
            });
        }
        if probabilities.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidParameter("prior has negative entries".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("prior sums to {total}")));
        }
        Ok(Prior { size, probabilities })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn probability(&self, phi: &[Angle8]) -> f64 {
        self.probabilities[assignment_code(phi)]
    }
}

fn assignment_code(angles: &[Angle8]) -> usize {
    angles.iter().rev().fold(0usize, |acc, a| acc * 8 + a.index() as usize)
}

fn assignment(code: usize, size: usize) -> Vec<Angle8> {
    (0..size)
        .map(|i| Angle8::new(((code / 8usize.pow(i as u32)) % 8) as i64))
        .collect()
}

fn check_size(size: usize) -> Result<()> {
    if size == 0 {
        return Err(Error::InvalidParameter("computation size must be >= 1".into()));
    }
    if size > MAX_EXACT_SIZE {
        return Err(Error::SizeTooLarge(size));
    }
    Ok(())
}

/// Classical content of one block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockKey {
    pub phi: Vec<Angle8>,
    pub r: Vec<bool>,
    pub delta: Vec<Angle8>,
}

/// One block: its weight and the pre-rotations that produce it.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub key: BlockKey,
    pub theta: Vec<Angle8>,
    pub weight: f64,
}

/// Block-sparse joint classical-quantum state.
#[derive(Clone, Debug)]
pub struct JointState {
    size: usize,
    prep: PreparationModel,
    per_angle: Vec<DensityMatrix>,
    blocks: BTreeMap<BlockKey, Block>,
}

/// Builds the joint state for `size <= 2` positions.
pub fn build_joint_state(size: usize, prep: &PreparationModel, prior: &Prior) -> Result<JointState> {
    check_size(size)?;
    if prior.size() != size {
        return Err(Error::LengthMismatch {
            left: prior.size(),
            right: size,
        });
    }
    prep.validate()?;
    let per_angle = Angle8::all().map(|t| prep.state(t)).collect::<Result<Vec<_>>>()?;
    let n_assign = 8usize.pow(size as u32);
    let base = 1.0 / ((1usize << size) * n_assign) as f64;
    let mut blocks = BTreeMap::new();
    for phi_code in 0..n_assign {
        let phi = assignment(phi_code, size);
        let p_phi = prior.probability(&phi);
        if p_phi == 0.0 {
            continue;
        }
        for r_code in 0..(1usize << size) {
            let r: Vec<bool> = (0..size).map(|i| (r_code >> i) & 1 == 1).collect();
            for theta_code in 0..n_assign {
                let theta = assignment(theta_code, size);
                let delta = (0..size).map(|i| blind_angle(phi[i], theta[i], r[i])).collect();
                let key = BlockKey {
                    phi: phi.clone(),
                    r: r.clone(),
                    delta,
                };
                blocks.insert(
                    key.clone(),
                    Block {
                        key,
                        theta,
                        weight: p_phi * base,
                    },
                );
            }
        }
    }
    Ok(JointState {
        size,
        prep: prep.clone(),
        per_angle,
        blocks,
    })
}

impl JointState {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn preparation(&self) -> &PreparationModel {
        &self.prep
    }

    pub fn blocks(&self) -> impl Iterator<Item = &Block> {
        self.blocks.values()
    }

    /// `⊗_i ρ^{θ_i}`.
    pub fn quantum_block(&self, theta: &[Angle8]) -> ComplexMatrix {
        theta
            .iter()
            .map(|t| self.per_angle[t.index() as usize].matrix().clone())
            .reduce(|acc, m| kron(&acc, &m))
            .expect("size >= 1")
    }

    /// Dimension of one quantum block.
    pub fn quantum_dim(&self) -> usize {
        self.per_angle[0].dim().pow(self.size as u32)
    }

    pub fn trace(&self) -> f64 {
        self.blocks
            .values()
            .map(|b| b.weight * self.quantum_block(&b.theta).trace().re)
            .sum()
    }

    /// Dense matrix on `φ (8) ⊗ r (2) ⊗ ρ (d) ⊗ δ (8)`; only for `S = 1`.
    pub fn to_dense(&self) -> Result<DensityMatrix> {
        if self.size != 1 {
            return Err(Error::SizeTooLarge(self.size));
        }
        let d = self.per_angle[0].dim();
        let dim = 8 * 2 * d * 8;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for b in self.blocks.values() {
            let client = kron(
                &basis_projector(8, b.key.phi[0].index() as usize),
                &basis_projector(2, usize::from(b.key.r[0])),
            );
            let server = kron(
                &self.quantum_block(&b.theta),
                &basis_projector(8, b.key.delta[0].index() as usize),
            );
            m += kron(&client, &server) * c(b.weight);
        }
        DensityMatrix::new(m)
    }

    /// Server's reduced state: block diagonal in `δ`, each block
    /// `Σ_{φ,r} w ⊗_i ρ^{θ_i}`.
    pub fn server_marginal(&self) -> BTreeMap<Vec<Angle8>, ComplexMatrix> {
        let dim = self.quantum_dim();
        let mut out: BTreeMap<Vec<Angle8>, ComplexMatrix> = BTreeMap::new();
        for b in self.blocks.values() {
            let entry = out
                .entry(b.key.delta.clone())
                .or_insert_with(|| ComplexMatrix::zeros(dim, dim));
            *entry += self.quantum_block(&b.theta) * c(b.weight);
        }
        out
    }
}

/// `(1/2) ||X||_1` for Hermitian `X`.
fn half_trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(0.5 * hermitian_eigenvalues(m)?.iter().map(|l| l.abs()).sum::<f64>())
}

/// Trace distance of two joint states, computed block by block.
pub fn joint_trace_distance(a: &JointState, b: &JointState) -> Result<f64> {
    if a.size != b.size || a.quantum_dim() != b.quantum_dim() {
        return Err(Error::DimensionMismatch {
            left: a.quantum_dim(),
            right: b.quantum_dim(),
        });
    }
    let zero = |js: &JointState| ComplexMatrix::zeros(js.quantum_dim(), js.quantum_dim());
    let mut memo: HashMap<(Vec<Angle8>, u64, u64), f64> = HashMap::new();
    let mut total = 0.0;
    for (key, block_a) in &a.blocks {
        let (w_b, theta) = match b.blocks.get(key) {
            Some(block_b) => (block_b.weight, &block_a.theta),
            None => (0.0, &block_a.theta),
        };
        let memo_key = (theta.clone(), block_a.weight.to_bits(), w_b.to_bits());
        let d = match memo.get(&memo_key) {
            Some(&d) => d,
            None => {
                let qb = if w_b > 0.0 { b.quantum_block(theta) } else { zero(b) };
                let diff = a.quantum_block(theta) * c(block_a.weight) - qb * c(w_b);
                let d = half_trace_norm(&diff)?;
                memo.insert(memo_key, d);
                d
            }
        };
        total += d;
    }
    for (key, block_b) in &b.blocks {
        if !a.blocks.contains_key(key) {
            total += 0.5 * block_b.weight * b.quantum_block(&block_b.theta).trace().re;
        }
    }
    Ok(total)
}

/// Trace distance between the server marginals of two joint states.
pub fn marginal_trace_distance(a: &JointState, b: &JointState) -> Result<f64> {
    let ma = a.server_marginal();
    let mb = b.server_marginal();
    let mut keys: Vec<&Vec<Angle8>> = ma.keys().chain(mb.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut total = 0.0;
    for k in keys {
        let diff = match (ma.get(k), mb.get(k)) {
            (Some(x), Some(y)) => x - y,
            (Some(x), None) => x.clone(),
            (None, Some(y)) => -y.clone(),
            (None, None) => unreachable!(),
        };
        total += half_trace_norm(&diff)?;
    }
    Ok(total)
}

/// Certified ε at a fixed map: `S · ε_prep(prep, E)`.
pub fn certified_epsilon(size: u64, prep: &PreparationModel, map: &CptpMap) -> Result<f64> {
    Ok(blindness_bound(size, epsilon_prep(prep, map)?))
}
