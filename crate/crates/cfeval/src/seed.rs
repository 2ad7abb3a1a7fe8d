//! Deterministic RNG stream derivation.
//!
//! Every randomized stage draws from its own stream derived from
//! `(global seed, stage tag, instance index)`, so per-instance results do
//! not depend on scheduling or on which other stages ran.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// SplitMix64 finalizer; full-avalanche mixing of a 64-bit word.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a global seed, a stage tag, and an index.
pub fn derive_seed(global: u64, tag: &str, index: u64) -> u64 {
    let mut h = mix(global);
    for b in tag.bytes() {
        h = mix(h ^ u64::from(b));
    }
    mix(h ^ index)
}

/// Seeded ChaCha stream for a `(global, tag, index)` triple.
pub fn rng_for(global: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(global, tag, index))
}

/// FNV-1a over bytes; used for schema and config fingerprints.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
