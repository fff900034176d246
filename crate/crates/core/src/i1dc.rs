//! Interlaced 1-D cluster computation.
//!
//! The server folds a chain of `|+_{σ_l}>` qubits into one qubit: for each
//! `i < k` it applies `CZ · (H ⊗ 1)` to qubits `i, i+1` and measures qubit `i`
//! in the Pauli-X basis. The survivor is `|+_θ>` with
//! `θ = Σ_l (-1)^{t_l} σ_l`, where `t_l` is the parity of the outcomes
//! `s_l, …, s_{k-1}` and `t_k = 0`.

use crate::qsim::{plus_state, BranchStream, PureState};
use crate::{Angle8, Error, Result};

/// Server-side result of one chain.
#[derive(Clone, Debug, PartialEq)]
pub struct I1dcResult {
    /// Suffix parities, length `k`, last entry always `false`.
    pub t_bits: Vec<bool>,
    /// Raw X outcomes, length `k - 1`.
    pub s_bits: Vec<bool>,
    /// The surviving single qubit.
    pub final_state: PureState,
}

/// `t_i = s_i ⊕ … ⊕ s_{k-1}` for `i < k`, `t_k = 0`.
pub fn t_from_s(s_bits: &[bool]) -> Vec<bool> {
    let mut t = vec![false; s_bits.len() + 1];
    for i in (0..s_bits.len()).rev() {
        t[i] = s_bits[i] ^ t[i + 1];
    }
    t
}

/// `θ = Σ_l (-1)^{t_l} σ_l mod 2π`.
pub fn client_theta(sigmas: &[Angle8], t_bits: &[bool]) -> Result<Angle8> {
    if sigmas.len() != t_bits.len() {
        return Err(Error::LengthMismatch {
            left: sigmas.len(),
            right: t_bits.len(),
        });
    }
    Ok(sigmas.iter().zip(t_bits).map(|(&s, &t)| s.negate_if(t)).sum())
}

/// One entangle-and-measure step: `CZ (H ⊗ 1)` on `(carry, next)`, then X on
/// `carry`. Returns the outcome and the new single-qubit carry.
pub fn chain_step(carry: &PureState, next: &PureState, branch_select: f64) -> Result<(bool, PureState)> {
    let pair = carry.tensor(next)?.apply_h(0)?.apply_cz(0, 1)?;
    let m = pair.measure_pauli_x(0, branch_select)?;
    Ok((m.bit, m.post_state))
}

/// Runs the chain on arbitrary single-qubit inputs, in order.
pub fn run_i1dc_states<I>(qubits: I, branches: &mut impl BranchStream) -> Result<I1dcResult>
where
    I: IntoIterator<Item = PureState>,
{
    let mut iter = qubits.into_iter();
    let mut carry = iter.next().ok_or(Error::EmptyInput("I1DC needs at least one qubit"))?;
    if carry.num_qubits() != 1 {
        return Err(Error::InvalidParameter("I1DC inputs must be single qubits".into()));
    }
    let mut s_bits = Vec::new();
    for next in iter {
        if next.num_qubits() != 1 {
            return Err(Error::InvalidParameter("I1DC inputs must be single qubits".into()));
        }
        let (s, post) = chain_step(&carry, &next, branches.next_select())?;
        s_bits.push(s);
        carry = post;
    }
    Ok(I1dcResult {
        t_bits: t_from_s(&s_bits),
        s_bits,
        final_state: carry,
    })
}

/// Runs the chain on `|+_{σ_1}>, …, |+_{σ_k}>`.
pub fn run_i1dc(sigmas: &[Angle8], branches: &mut impl BranchStream) -> Result<I1dcResult> {
    if sigmas.is_empty() {
        return Err(Error::EmptyInput("I1DC needs at least one angle"));
    }
    run_i1dc_states(sigmas.iter().map(|&s| plus_state(s)), branches)
}

/// Runs the chain on `|+_{σ_l}>` with every X outcome forced to `s_bits`.
/// Returns the survivor and the probability of that branch, or `None` when
/// the branch has zero weight.
pub fn run_i1dc_forced(sigmas: &[Angle8], s_bits: &[bool]) -> Result<Option<(PureState, f64)>> {
    if sigmas.is_empty() {
        return Err(Error::EmptyInput("I1DC needs at least one angle"));
    }
    if s_bits.len() + 1 != sigmas.len() {
        return Err(Error::LengthMismatch {
            left: s_bits.len() + 1,
            right: sigmas.len(),
        });
    }
    let mut carry = plus_state(sigmas[0]);
    let mut probability = 1.0;
    for (&sigma, &bit) in sigmas[1..].iter().zip(s_bits) {
        let pair = carry.tensor(&plus_state(sigma))?.apply_h(0)?.apply_cz(0, 1)?;
        let (p, post) = pair.project(0, Angle8::ZERO, bit)?;
        match post {
            Some(next) => {
                probability *= p;
                carry = next;
            }
            None => return Ok(None),
        }
    }
    Ok(Some((carry, probability)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{fidelity, FixedBranches};
    use crate::seed::rng_from_seed;
    use rand::Rng;

    fn a(k: i64) -> Angle8 {
        Angle8::new(k)
    }

    #[test]
    fn t_from_s_examples() {
        assert_eq!(t_from_s(&[]), vec![false]);
        assert_eq!(t_from_s(&[true, false, true]), vec![false, true, true, false]);
        assert_eq!(t_from_s(&[false; 4]), vec![false; 5]);
    }

    #[test]
    fn client_theta_examples() {
        assert_eq!(client_theta(&[a(5)], &[false]).unwrap(), a(5));
        assert_eq!(client_theta(&[a(1), a(2)], &[true, false]).unwrap(), a(1));
        assert_eq!(client_theta(&[a(3), a(3), a(3)], &[false, true, false]).unwrap(), a(3));
        assert!(matches!(client_theta(&[a(1)], &[]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn single_qubit_is_untouched() {
        let r = run_i1dc(&[a(3)], &mut FixedBranches::first()).unwrap();
        assert_eq!(r.t_bits, vec![false]);
        assert!(r.s_bits.is_empty());
        assert_eq!(r.final_state, plus_state(a(3)));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(
            run_i1dc(&[], &mut FixedBranches::first()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn two_qubit_base_case() {
        for s1 in Angle8::all() {
            for s2 in Angle8::all() {
                for branches in [FixedBranches::first(), FixedBranches::last()] {
                    let mut b = branches;
                    let r = run_i1dc(&[s1, s2], &mut b).unwrap();
                    let expected = s2 + s1.negate_if(r.s_bits[0]);
                    let f = fidelity(&r.final_state, &plus_state(expected)).unwrap();
                    assert!(f > 1.0 - 1e-12, "σ=({s1},{s2}) s={:?} f={f}", r.s_bits);
                }
            }
        }
    }

    #[test]
    fn forced_branches_are_equally_likely() {
        let sigmas = [a(1), a(4), a(6)];
        for code in 0..4 {
            let s = [code & 1 == 1, code & 2 == 2];
            let (state, p) = run_i1dc_forced(&sigmas, &s).unwrap().unwrap();
            assert!((p - 0.25).abs() < 1e-12);
            let theta = client_theta(&sigmas, &t_from_s(&s)).unwrap();
            assert!(fidelity(&state, &plus_state(theta)).unwrap() > 1.0 - 1e-12);
        }
        assert!(matches!(
            run_i1dc_forced(&sigmas, &[true]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn five_qubit_random_chains() {
        let mut rng = rng_from_seed(5);
        for _ in 0..200 {
            let sigmas: Vec<Angle8> = (0..5).map(|_| a(rng.random_range(0..8))).collect();
            let r = run_i1dc(&sigmas, &mut rng).unwrap();
            let theta = client_theta(&sigmas, &r.t_bits).unwrap();
            assert!(fidelity(&r.final_state, &plus_state(theta)).unwrap() >= 1.0 - 1e-9);
        }
    }
}
