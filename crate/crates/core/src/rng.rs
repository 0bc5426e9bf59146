//! Seeded random number generation.
//!
//! Every stochastic operation takes a `u64` seed and builds a
//! [`ChaCha8Rng`] from it. Independent streams (restarts, Monte Carlo
//! realizations, acquisition periods) get seeds derived from a master seed
//! and a stream index, so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeqRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeqRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives the seed of stream `index` from `master` (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for a named sub-stream, e.g. the swap-move stream of the optimizer.
pub fn derive_named_seed(master: u64, name: &str) -> u64 {
    let tag = name.bytes().fold(0xCBF2_9CE4_8422_2325_u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x1000_0000_01B3)
    });
    derive_seed(master, tag)
}
