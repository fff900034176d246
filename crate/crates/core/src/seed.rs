//! Deterministic seed derivation.
//!
//! A master seed and a trial index map to a per-trial seed through one
//! SplitMix64 finalisation of `master + (index + 1) · γ`, with `γ` the 64-bit
//! golden-ratio constant. Trial `i` therefore always receives the same seed
//! no matter how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// The generator used for every simulated run.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for trial `index` under `master`.
pub fn trial_rng(master: u64, index: u64) -> SimRng {
    rng_from_seed(trial_seed(master, index))
}
