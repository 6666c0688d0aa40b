//! Seed derivation. Every random choice in a run comes from a ChaCha8 stream
//! keyed by (run seed, stage, index), so runs replay exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn sub_seed(seed: u64, stage: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stage) ^ index)
}

pub fn rng_for(seed: u64, stage: u64, index: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(seed, stage, index))
}

/// Stage tags. Distinct constants keep unrelated streams apart.
pub mod stage {
    pub const GENERATE: u64 = 0x67656e;
    pub const SEARCH_FAIL: u64 = 0x6661696c;
    pub const COLOR_QUERY: u64 = 0x636f6c;
    pub const LIGHT_INDEX: u64 = 0x696478;
    pub const TRIAL: u64 = 0x747269;
}
