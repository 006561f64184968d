//! Seed derivation.
//!
//! All randomness is drawn from ChaCha8 streams keyed by structured tuples,
//! never from a shared generator, so results are independent of how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Clone index used for the resampling stream of a level.
pub const RESAMPLE_STREAM: u64 = u64::MAX;

/// Stream for clone `clone` at `level`, `attempt` under `master`.
///
/// The four words are laid out verbatim in the 256-bit ChaCha key, so
/// distinct tuples always give distinct keys.
pub fn clone_seed_stream(master: u64, clone: u64, level: u64, attempt: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&clone.to_le_bytes());
    key[16..24].copy_from_slice(&level.to_le_bytes());
    key[24..32].copy_from_slice(&attempt.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of experiment `index` in a batch run under `master`:
/// `splitmix64(splitmix64(master) ^ index)`.
///
/// Any single experiment can be reproduced from `(master, index)` alone.
pub fn experiment_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}
