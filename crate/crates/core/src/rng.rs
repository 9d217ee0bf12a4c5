//! Seeded random streams.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// A ChaCha8 generator for stream `stream` of master seed `seed`.
///
/// Distinct streams are statistically independent, so trial `i` of a run can
/// draw from `stream(seed, i)` regardless of the order trials execute in.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sub-stream identifiers used inside a single experiment trial.
pub(crate) mod lane {
    pub const MATRIX: u64 = 1;
    pub const SIGNAL: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const CONSTANTS: u64 = 4;
}

/// Derives a per-(trial, lane) seed from a master seed.
pub(crate) fn derive_seed(master: u64, trial: u64, lane: u64) -> u64 {
    // splitmix64 finalizer over the packed inputs
    let mut z = master
        ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ lane.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
