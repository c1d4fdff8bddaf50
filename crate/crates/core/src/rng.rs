//! Seed derivation.
//!
//! Every consumer of randomness draws from its own stream, keyed by the
//! experiment seed and a component label, so that adding randomness to one
//! stage never shifts the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 output step applied to `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a hash of a component label.
pub fn hash64(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Sub-seed for component `label`: `splitmix64(seed ^ hash64(label))`.
pub fn sub_seed(seed: u64, label: &str) -> u64 {
    splitmix64(seed ^ hash64(label))
}

/// Sub-seed for the `index`-th member of component `label`.
pub fn sub_seed_indexed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix64(sub_seed(seed, label) ^ splitmix64(index))
}

/// Generator seeded from [`sub_seed`].
pub fn stream(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(seed, label))
}

/// Generator seeded from [`sub_seed_indexed`].
pub fn stream_indexed(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed_indexed(seed, label, index))
}
