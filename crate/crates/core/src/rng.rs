//! Seed derivation for named, independent random streams.
//!
//! All randomness in the crate flows from one master seed. Each consumer
//! (dataset replication, training run, synthesis call) derives its own
//! stream from `(master_seed, label, index)` so that replications are
//! reproducible and mutually independent, and adding a new stream never
//! shifts an existing one.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer; full-period mixing of a 64-bit state.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes.
fn hash_label(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives the stream seed for `(master_seed, label, index)`.
pub fn derive_seed(master_seed: u64, label: &str, index: u64) -> u64 {
    let mut state = master_seed;
    let a = splitmix64(&mut state);
    let mut state = a ^ hash_label(label);
    let b = splitmix64(&mut state);
    let mut state = b ^ index;
    splitmix64(&mut state)
}

/// A seeded ChaCha12 stream for `(master_seed, label, index)`.
pub fn stream(master_seed: u64, label: &str, index: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(master_seed, label, index))
}
