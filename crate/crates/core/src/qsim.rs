//! Dense state-vector simulator.
//!
//! Qubit `q` of an `n`-qubit register is bit `q` of the basis-state index
//! (little-endian). Measured qubits are removed from the register, so indices
//! always refer to positions in the current register; callers that need
//! stable identities keep their own label map.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::linalg::{ComplexMatrix, DensityMatrix};
use crate::{Angle8, Error, Result, C64};

/// Largest register the simulator will build.
pub const MAX_QUBITS: usize = 14;

/// Branch probabilities at or below this are rounding noise and count as zero.
pub const NEGLIGIBLE_PROBABILITY: f64 = 1e-20;

/// Normalised pure state of `num_qubits` qubits. A zero-qubit state is the
/// empty register left after every qubit has been measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

/// `|+_θ> = (|0> + e^{iθ}|1>)/√2`.
pub fn plus_state(theta: Angle8) -> PureState {
    let phase = C64::from_polar(FRAC_1_SQRT_2, theta.radians());
    PureState {
        num_qubits: 1,
        amplitudes: vec![C64::new(FRAC_1_SQRT_2, 0.0), phase],
    }
}

/// `|ψ><ψ|` in the little-endian basis of the register.
pub fn pure_to_density(state: &PureState) -> DensityMatrix {
    let v = nalgebra::DVector::from_column_slice(&state.amplitudes);
    DensityMatrix::new_unchecked(&v * v.adjoint())
}

/// `|<a|b>|²`.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::DimensionMismatch {
            left: a.num_qubits,
            right: b.num_qubits,
        });
    }
    let overlap: C64 = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum();
    Ok(overlap.norm_sqr())
}

/// One branch of a single-qubit measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome {
    /// `false` for the `|+_δ>` (eigenvalue +1) branch, `true` for `|-_δ>`.
    pub bit: bool,
    pub probability: f64,
    /// Renormalised state of the remaining qubits.
    pub post_state: PureState,
}

impl PureState {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        check_cap(num_qubits)?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = C64::new(1.0, 0.0);
        Ok(PureState { num_qubits, amplitudes })
    }

    /// Basis state `|index>` (little-endian bits).
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let mut s = PureState::zero(num_qubits)?;
        if index >= s.amplitudes.len() {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        s.amplitudes[0] = C64::new(0.0, 0.0);
        s.amplitudes[index] = C64::new(1.0, 0.0);
        Ok(s)
    }

    /// Builds a state from raw amplitudes, normalising them.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude vector length {len} is not a power of two"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_cap(num_qubits)?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("zero or non-finite norm".into()));
        }
        Ok(PureState {
            num_qubits,
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        })
    }

    /// Product state `|+_{θ_0}> ⊗ |+_{θ_1}> ⊗ ...` with qubit `i` carrying `thetas[i]`.
    pub fn plus_product(thetas: &[Angle8]) -> Result<Self> {
        check_cap(thetas.len())?;
        let mut state = PureState::empty();
        for &t in thetas {
            state = state.tensor(&plus_state(t))?;
        }
        Ok(state)
    }

    /// The zero-qubit register.
    pub fn empty() -> Self {
        PureState {
            num_qubits: 0,
            amplitudes: vec![C64::new(1.0, 0.0)],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Appends `other`'s qubits after this register's qubits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let n = self.num_qubits + other.num_qubits;
        check_cap(n)?;
        let mut amplitudes = Vec::with_capacity(1 << n);
        for b in &other.amplitudes {
            for a in &self.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(PureState {
            num_qubits: n,
            amplitudes,
        })
    }

    fn check_index(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Hadamard on `target`.
    pub fn apply_h(&self, target: usize) -> Result<PureState> {
        self.check_index(target)?;
        let mask = 1usize << target;
        let mut out = self.amplitudes.clone();
        for i in 0..out.len() {
            if i & mask == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | mask];
                out[i] = (a0 + a1) * FRAC_1_SQRT_2;
                out[i | mask] = (a0 - a1) * FRAC_1_SQRT_2;
            }
        }
        Ok(PureState {
            num_qubits: self.num_qubits,
            amplitudes: out,
        })
    }

    /// Controlled-Z between `a` and `b`.
    pub fn apply_cz(&self, a: usize, b: usize) -> Result<PureState> {
        self.check_index(a)?;
        self.check_index(b)?;
        if a == b {
            return Err(Error::SameQubit(a));
        }
        let mask = (1usize << a) | (1usize << b);
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &amp)| if i & mask == mask { -amp } else { amp })
            .collect();
        Ok(PureState {
            num_qubits: self.num_qubits,
            amplitudes,
        })
    }

    /// Phase rotation `diag(1, e^{iθ})` on `target`; maps `|+>` to `|+_θ>`.
    pub fn apply_phase(&self, target: usize, theta: Angle8) -> Result<PureState> {
        self.check_index(target)?;
        let mask = 1usize << target;
        let phase = C64::from_polar(1.0, theta.radians());
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &amp)| if i & mask != 0 { amp * phase } else { amp })
            .collect();
        Ok(PureState {
            num_qubits: self.num_qubits,
            amplitudes,
        })
    }

    /// Projects `target` onto `|+_δ>` (`bit = false`) or `|-_δ>` (`bit = true`)
    /// and removes it. Returns the Born probability and the renormalised
    /// remainder; the remainder is `None` when the branch has zero weight.
    pub fn project(&self, target: usize, delta: Angle8, bit: bool) -> Result<(f64, Option<PureState>)> {
        self.check_index(target)?;
        let mask = 1usize << target;
        let low = mask - 1;
        // <±_δ| = (<0| ± e^{-iδ}<1|)/√2
        let sign = if bit { -1.0 } else { 1.0 };
        let coeff = C64::from_polar(sign * FRAC_1_SQRT_2, -delta.radians());
        let half = self.amplitudes.len() / 2;
        let mut rest = Vec::with_capacity(half);
        for j in 0..half {
            let i0 = ((j & !low) << 1) | (j & low);
            let a0 = self.amplitudes[i0];
            let a1 = self.amplitudes[i0 | mask];
            rest.push(a0 * FRAC_1_SQRT_2 + a1 * coeff);
        }
        let probability: f64 = rest.iter().map(|a| a.norm_sqr()).sum();
        if probability <= NEGLIGIBLE_PROBABILITY {
            return Ok((0.0, None));
        }
        let norm = probability.sqrt();
        let post = PureState {
            num_qubits: self.num_qubits - 1,
            amplitudes: rest.into_iter().map(|a| a / norm).collect(),
        };
        Ok((probability.min(1.0), Some(post)))
    }

    /// Measures `target` in `{|+_δ>, |-_δ>}`. Bit 0 is chosen when
    /// `branch_select` is below its Born probability, bit 1 otherwise.
    pub fn measure_rotated(&self, target: usize, delta: Angle8, branch_select: f64) -> Result<MeasurementOutcome> {
        let (p0, post0) = self.project(target, delta, false)?;
        match post0 {
            Some(post_state) if branch_select < p0 => Ok(MeasurementOutcome {
                bit: false,
                probability: p0,
                post_state,
            }),
            _ => {
                let (p1, post1) = self.project(target, delta, true)?;
                match post1 {
                    Some(post_state) => Ok(MeasurementOutcome {
                        bit: true,
                        probability: p1,
                        post_state,
                    }),
                    // Bit 1 has no weight at all; only reachable through rounding.
                    None => Ok(MeasurementOutcome {
                        bit: false,
                        probability: p0,
                        post_state: post0
                            .ok_or_else(|| Error::Consistency("both measurement branches vanish".into()))?,
                    }),
                }
            }
        }
    }

    /// Pauli-X measurement, i.e. [`measure_rotated`](Self::measure_rotated) at `δ = 0`.
    pub fn measure_pauli_x(&self, target: usize, branch_select: f64) -> Result<MeasurementOutcome> {
        self.measure_rotated(target, Angle8::ZERO, branch_select)
    }

    /// Dense column vector of the amplitudes.
    pub fn to_vector(&self) -> ComplexMatrix {
        ComplexMatrix::from_column_slice(self.amplitudes.len(), 1, &self.amplitudes)
    }
}

fn check_cap(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            requested: n,
            cap: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Source of branch-selection values in `[0, 1)`.
///
/// Measurements never draw randomness themselves; a run is a pure function of
/// its inputs and the stream it consumes.
pub trait BranchStream {
    fn next_select(&mut self) -> f64;
}

impl<R: rand::RngCore> BranchStream for R {
    fn next_select(&mut self) -> f64 {
        rand::Rng::random::<f64>(self)
    }
}

/// Replays a fixed list of selection values, cycling when exhausted.
#[derive(Clone, Debug)]
pub struct FixedBranches {
    values: Vec<f64>,
    next: usize,
}

impl FixedBranches {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "FixedBranches needs at least one value");
        FixedBranches { values, next: 0 }
    }

    /// Always selects bit 0 when it has weight, otherwise bit 1.
    pub fn first() -> Self {
        FixedBranches::new(vec![0.0])
    }

    /// Always selects bit 1 when it has weight.
    pub fn last() -> Self {
        FixedBranches::new(vec![1.0 - f64::EPSILON])
    }
}

impl BranchStream for FixedBranches {
    fn next_select(&mut self) -> f64 {
        let v = self.values[self.next % self.values.len()];
        self.next += 1;
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &PureState, b: &PureState, tol: f64) -> bool {
        a.num_qubits == b.num_qubits
            && a.amplitudes
                .iter()
                .zip(&b.amplitudes)
                .all(|(x, y)| (x - y).norm() < tol)
    }

    fn random_state(rng: &mut impl Rng, n: usize) -> PureState {
        let amps = (0..1 << n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        PureState::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn plus_state_examples() {
        let s = FRAC_1_SQRT_2;
        let p0 = plus_state(Angle8::new(0));
        assert!((p0.amplitudes[0] - C64::new(s, 0.0)).norm() < 1e-15);
        assert!((p0.amplitudes[1] - C64::new(s, 0.0)).norm() < 1e-15);
        let p4 = plus_state(Angle8::new(4));
        assert!((p4.amplitudes[1] - C64::new(-s, 0.0)).norm() < 1e-15);
        let p2 = plus_state(Angle8::new(2));
        assert!((p2.amplitudes[1] - C64::new(0.0, s)).norm() < 1e-15);
    }

    #[test]
    fn plus_states_k_and_k_plus_4_are_orthogonal() {
        for k in Angle8::all() {
            assert!(fidelity(&plus_state(k), &plus_state(k.flip())).unwrap() < 1e-12);
        }
    }

    #[test]
    fn hadamard_examples() {
        let zero = PureState::zero(1).unwrap();
        let plus = plus_state(Angle8::ZERO);
        assert!(close(&zero.apply_h(0).unwrap(), &plus, 1e-15));
        assert!(close(&plus.apply_h(0).unwrap(), &zero, 1e-15));
        assert!(matches!(zero.apply_h(1), Err(Error::QubitOutOfRange { .. })));
    }

    #[test]
    fn cz_examples() {
        let s11 = PureState::basis(2, 0b11).unwrap();
        let out = s11.apply_cz(0, 1).unwrap();
        assert_eq!(out.amplitudes[3], C64::new(-1.0, 0.0));
        let s10 = PureState::basis(2, 0b01).unwrap();
        assert_eq!(s10.apply_cz(1, 0).unwrap(), s10);
        assert!(matches!(s11.apply_cz(1, 1), Err(Error::SameQubit(1))));
    }

    #[test]
    fn rotated_measurement_examples() {
        for d in Angle8::all() {
            for sel in [0.0, 0.5, 0.999] {
                let m = plus_state(d).measure_rotated(0, d, sel).unwrap();
                assert!(!m.bit);
                assert!((m.probability - 1.0).abs() < 1e-12);
                let m = plus_state(d.flip()).measure_rotated(0, d, sel).unwrap();
                assert!(m.bit);
                assert!((m.probability - 1.0).abs() < 1e-12);
                assert_eq!(m.post_state.num_qubits(), 0);
            }
        }
        let zero = PureState::zero(1).unwrap();
        let m0 = zero.measure_rotated(0, Angle8::ZERO, 0.25).unwrap();
        let m1 = zero.measure_rotated(0, Angle8::ZERO, 0.75).unwrap();
        assert!(!m0.bit && m1.bit);
        assert!((m0.probability - 0.5).abs() < 1e-12 && (m1.probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pauli_x_examples() {
        let m = plus_state(Angle8::ZERO).measure_pauli_x(0, 0.7).unwrap();
        assert!(!m.bit && (m.probability - 1.0).abs() < 1e-12);
        let m = plus_state(Angle8::PI).measure_pauli_x(0, 0.1).unwrap();
        assert!(m.bit && (m.probability - 1.0).abs() < 1e-12);
        let p = plus_state(Angle8::new(2)).project(0, Angle8::ZERO, false).unwrap().0;
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn measurement_keeps_remaining_qubits_in_order() {
        // |0> ⊗ |+> ⊗ |1>; measuring the middle qubit leaves |0> ⊗ |1>.
        let s = PureState::zero(1)
            .unwrap()
            .tensor(&plus_state(Angle8::ZERO))
            .unwrap()
            .tensor(&PureState::basis(1, 1).unwrap())
            .unwrap();
        let m = s.measure_pauli_x(1, 0.3).unwrap();
        assert!(!m.bit);
        assert!(close(&m.post_state, &PureState::basis(2, 0b10).unwrap(), 1e-12));
    }

    #[test]
    fn density_examples() {
        let d = pure_to_density(&PureState::zero(1).unwrap());
        assert_eq!(d.matrix()[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(d.matrix()[(1, 1)], C64::new(0.0, 0.0));
        let p = pure_to_density(&plus_state(Angle8::ZERO));
        assert!(p.matrix().iter().all(|z| (z - C64::new(0.5, 0.0)).norm() < 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = pure_to_density(&random_state(&mut rng, 3));
        assert!((r.trace() - 1.0).abs() < 1e-12);
        let sq = r.matrix() * r.matrix();
        assert!((sq - r.matrix()).norm() < 1e-10);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(PureState::zero(MAX_QUBITS).is_ok());
        assert!(matches!(
            PureState::zero(MAX_QUBITS + 1),
            Err(Error::TooManyQubits { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gates_preserve_norm_and_are_involutions(seed in any::<u64>(), n in 2usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(&mut rng, n);
            let t = rng.random_range(0..n);
            let h = s.apply_h(t).unwrap();
            prop_assert!((h.norm() - 1.0).abs() < 1e-10);
            prop_assert!(close(&h.apply_h(t).unwrap(), &s, 1e-12));
            let a = rng.random_range(0..n);
            let b = (a + 1 + rng.random_range(0..n - 1)) % n;
            let cz = s.apply_cz(a, b).unwrap();
            prop_assert!((cz.norm() - 1.0).abs() < 1e-10);
            prop_assert!(close(&cz.apply_cz(b, a).unwrap(), &s, 1e-12));
        }

        #[test]
        fn disjoint_gates_commute(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(&mut rng, 4);
            let one = s.apply_cz(0, 1).unwrap().apply_h(3).unwrap();
            let two = s.apply_h(3).unwrap().apply_cz(0, 1).unwrap();
            prop_assert!(close(&one, &two, 1e-12));
        }

        #[test]
        fn measurement_branches_are_complete(seed in any::<u64>(), n in 1usize..5, d in 0i64..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(&mut rng, n);
            let t = rng.random_range(0..n);
            let (p0, s0) = s.project(t, Angle8::new(d), false).unwrap();
            let (p1, s1) = s.project(t, Angle8::new(d), true).unwrap();
            prop_assert!((p0 + p1 - 1.0).abs() < 1e-10);
            for post in [s0, s1].into_iter().flatten() {
                prop_assert!((post.norm() - 1.0).abs() < 1e-10);
            }
        }

        #[test]
        fn measurement_replay_is_deterministic(seed in any::<u64>(), sels in proptest::collection::vec(0.0f64..1.0, 4)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(&mut rng, 4);
            let run = |sels: &[f64]| {
                let mut cur = s.clone();
                let mut bits = Vec::new();
                for (i, &sel) in sels.iter().enumerate() {
                    let m = cur.measure_rotated(0, Angle8::new(i as i64), sel).unwrap();
                    bits.push(m.bit);
                    cur = m.post_state;
                }
                bits
            };
            prop_assert_eq!(run(&sels), run(&sels));
        }
    }
}
