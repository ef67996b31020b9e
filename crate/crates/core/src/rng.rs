//! Reproducible random substreams.
//!
//! Every random quantity is drawn from a stream keyed by a master seed and a
//! tuple of integers (replicate index, cell key, ...). Streams never depend on
//! execution order, so serial and parallel runs produce identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `keys` into `master`, producing a well-mixed 64-bit seed.
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    let mut h = mix64(master.wrapping_add(GOLDEN));
    for (i, &k) in keys.iter().enumerate() {
        h = mix64(h ^ mix64(k.wrapping_add(GOLDEN.wrapping_mul(i as u64 + 2))));
    }
    h
}

pub fn substream(master: u64, keys: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, keys))
}

/// FNV-1a, used to key streams by textual descriptors. Stable across builds.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
