//! Deterministic seed derivation.
//!
//! Every random choice in the crate draws from a `ChaCha8Rng` seeded through
//! [`derive`], so a run is a pure function of its master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for a labelled sub-stream of `seed`.
pub fn derive(seed: u64, tag: u64) -> u64 {
    mix(mix(seed) ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Hashes a sequence of words into one seed, order-sensitive.
pub fn derive_path(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(seed), |acc, &w| derive(acc, w))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
