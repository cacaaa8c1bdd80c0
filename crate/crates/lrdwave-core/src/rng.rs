//! Deterministic seed derivation and counter-based generators.
//!
//! Every stochastic routine takes an explicit 64-bit seed and expands it with
//! a ChaCha stream cipher; parallel replicas get disjoint streams derived by
//! a SplitMix64 chain, so results are independent of scheduling and worker
//! count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; standard constants.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministically derive a child seed from a master seed and a path of
/// indices (for example `[cell, replica]`). Order-sensitive.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &p in path {
        state = splitmix64(state ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    state
}

/// ChaCha generator for a given seed on stream 0.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// ChaCha generator on a dedicated stream; streams with the same seed are
/// mutually independent.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
