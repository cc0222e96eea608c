//! Seed derivation. Every random draw in the crate comes from a stream that
//! is a pure function of `(seed, purpose, index)`, so results do not depend
//! on task scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Scenario samples of the demand polyhedron.
pub const PURPOSE_SCENARIOS: u64 = 1;
/// Multi-start initial points.
pub const PURPOSE_STARTS: u64 = 2;
/// Fresh draws for Monte-Carlo violation estimates.
pub const PURPOSE_TEST: u64 = 3;
/// Repetitions of a whole experiment.
pub const PURPOSE_REPEAT: u64 = 4;
/// Randomised nominal polyhedron generators.
pub const PURPOSE_NOMINAL: u64 = 5;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for a given purpose and index.
pub fn derive_seed(seed: u64, purpose: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(purpose)) ^ index)
}

/// Independent generator for task `index` of a given purpose.
pub fn stream(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, purpose, 0));
    rng.set_stream(index);
    rng
}
