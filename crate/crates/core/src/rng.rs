//! Reproducible random streams keyed by a path of integers.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] whose 256-bit key
//! is derived from `(seed, tag_1, ..., tag_m)` with SplitMix64 mixing. ChaCha is
//! a counter-mode generator, so distinct keys give independent streams and a
//! stream's output depends only on its key, never on which thread runs it or
//! in which order streams are created.
//!
//! Tag conventions used by the rest of the crate:
//!
//! | consumer                         | key                                        |
//! |----------------------------------|--------------------------------------------|
//! | permutation replicate `b`        | `(seed, PERMUTATION, b)`                   |
//! | study dataset, class `k`         | `(seed, DATA, beta_index, replicate, k)`   |
//! | study permutation test           | `(seed, PERM_SEED, beta_index, replicate)` |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

pub mod tag {
    pub const PERMUTATION: u64 = 0x7065_726d; // "perm"
    pub const DATA: u64 = 0x6461_7461; // "data"
    pub const PERM_SEED: u64 = 0x7073_6564; // "psed"
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a path of tags into a single 64-bit key.
pub fn derive_key(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(seed), |h, &t| splitmix64(h ^ splitmix64(t.wrapping_add(h))))
}

/// The generator for `(seed, path...)`.
pub fn stream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut state = derive_key(seed, path);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
