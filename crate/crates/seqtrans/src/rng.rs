//! Deterministic seed derivation.
//!
//! Every randomized component takes an explicit 64-bit seed. Sub-seeds are
//! derived by mixing the parent seed with fixed stream tags, so adding or
//! reordering consumers never shifts another component's stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags for the independent RNG streams hanging off one parent seed.
/// The values are arbitrary but frozen: changing them changes every output.
pub mod stream {
    pub const SUITE_TASK: u64 = 0x01;
    pub const SUITE_SPLIT: u64 = 0x02;
    pub const SHUFFLE: u64 = 0x10;
    pub const REPLAY: u64 = 0x11;
    pub const RESERVOIR: u64 = 0x12;
    pub const INIT: u64 = 0x13;
    pub const PROBE: u64 = 0x20;
    pub const ORDERS: u64 = 0x30;
    pub const RUN: u64 = 0x31;
    pub const COMPARE: u64 = 0x32;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a parent seed with a sequence of tags into a child seed.
pub fn derive(parent: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(parent);
    for &tag in tags {
        state = splitmix64(state ^ tag);
    }
    state
}

/// Seeded ChaCha stream; the only RNG used anywhere in the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// FNV-1a over a byte string. Used to fingerprint configs in reports; not a
/// cryptographic hash.
pub fn fingerprint(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
