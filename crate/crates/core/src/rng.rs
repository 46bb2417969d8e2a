//! Deterministic RNG plumbing.
//!
//! Every randomized routine takes an explicit generator. Substreams for
//! replicates, restarts, and permutations are derived by mixing a base seed
//! with stream tags, so concurrent execution order never changes results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout: fast, portable, reproducible across
/// platforms for a given seed.
pub type Rng = ChaCha8Rng;

/// Builds the root generator for a seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Derives an independent substream from a seed and stream tags.
///
/// SplitMix64 finalization over the concatenated words; collisions between
/// distinct tag tuples are as unlikely as 64-bit hash collisions.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &t in tags {
        state = splitmix64(state.wrapping_add(t).wrapping_add(0x9e37_79b9_7f4a_7c15));
    }
    splitmix64(state)
}

/// Substream generator for `(seed, tags...)`.
pub fn rng_substream(seed: u64, tags: &[u64]) -> Rng {
    rng_from_seed(derive_seed(seed, tags))
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
