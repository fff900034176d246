//! Simulation and verification library for universal blind quantum
//! computation (UBQC) with qubits prepared remotely from weak coherent pulses.
//!
//! The crate is organised bottom-up:
//!
//! - [`angle`] and [`linalg`]: discrete angles `kπ/4`, dense complex matrices,
//!   Hermitian eigenvalues and trace distance.
//! - [`qsim`]: a small dense state-vector simulator with the gate and
//!   measurement set the protocols need.
//! - [`mbqc`]: brickwork resource states, flow dependencies and the unblinded
//!   adaptive measurement machine.
//! - [`ubqc`]: client and server of the blind protocol, with transcripts.
//! - [`i1dc`]: the interlaced 1-D cluster subroutine.
//! - [`rbsp`]: remote blind qubit state preparation from weak coherent pulses.
//! - [`analysis`]: joint classical-quantum states, preparation error and the
//!   closed-form blindness / robustness bounds.
//! - [`seed`]: deterministic per-trial seed derivation.

pub mod analysis;
pub mod angle;
pub mod error;
pub mod i1dc;
pub mod linalg;
pub mod mbqc;
pub mod qsim;
pub mod rbsp;
pub mod seed;
pub mod ubqc;

pub use angle::Angle8;
pub use error::{Error, Result};
pub use linalg::{hermitian_eigenvalues, trace_distance, ComplexMatrix, DensityMatrix};
pub use qsim::{plus_state, PureState};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Global comparison tolerance for floating point checks.
pub const TOLERANCE: f64 = 1e-10;
