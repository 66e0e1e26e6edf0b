//! Deterministic derivation of per-subsystem RNG seeds from one master seed.
//!
//! Every stochastic component (world init, parameter init, exploration,
//! replay sampling, ...) owns its own ChaCha stream derived from the run
//! seed and a stable tag, so adding a consumer never perturbs the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Derive a child seed from `master` and a stable subsystem tag.
pub fn derive(master: u64, tag: &str) -> u64 {
    // FNV-1a over the tag, then a splitmix64 finalizer.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = master ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// ChaCha stream seeded from `master` and `tag`.
pub fn rng(master: u64, tag: &str) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive(master, tag))
}
