//! Index-keyed seed derivation.
//!
//! Every batch operation in this crate draws randomness from a per-item
//! stream seeded by `(master_seed, index)`. Items can then run on any number
//! of workers in any order and still produce bit-identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives a child seed from a master seed and an item index.
///
/// This is the splitmix64 output function evaluated at position `index + 1`
/// of the stream starting at `master_seed`; adjacent indices yield
/// statistically independent values.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for item `index` under `master_seed`.
pub fn rng_for(master_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, index))
}
