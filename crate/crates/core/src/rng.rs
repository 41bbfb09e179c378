//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit RNG; trial `i` of a run with
//! master seed `s` uses the stream seeded with `s + i` (wrapping).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn trial_seed(master: u64, trial: u64) -> u64 {
    master.wrapping_add(trial)
}
