//! Seed plumbing.
//!
//! All randomness flows through `ChaCha8Rng` seeded from explicit `u64`s.
//! Sub-streams (per scout, per episode, per condition) get their own seeds via
//! [`derive_seed`] so that adding a consumer never shifts the stream of
//! another.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stable tags for the fixed sub-streams an experiment pipeline uses.
pub mod stream {
    pub const INIT: u64 = 1;
    pub const PRETRAIN: u64 = 2;
    pub const SCOUT_FAMILY: u64 = 3;
    pub const EPISODE_CATEGORIES: u64 = 4;
    pub const EPISODE_SPLIT: u64 = 5;
    pub const HEAD: u64 = 6;
    pub const FINETUNE: u64 = 7;
    pub const TASK: u64 = 8;
    pub const SCOUT_BASE: u64 = 9;
    pub const BLOCKS: u64 = 10;
}

/// Derives an independent seed from `(root, tag)` (SplitMix64 finalizer).
pub fn derive_seed(root: u64, tag: u64) -> u64 {
    let mut z = root ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The engine's RNG, seeded from a `u64`.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
