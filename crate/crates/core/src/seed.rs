//! Seed derivation.
//!
//! Every random stream in the crate is keyed by a 64-bit seed. Child seeds are
//! produced by folding a sequence of tags into the parent with the SplitMix64
//! finalizer, so `derive(s, &[a, b])` and `derive(s, &[b, a])` are unrelated
//! streams and no two (cell, arm, trial) triples share a seed.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `tags` into `seed` one at a time.
pub fn derive(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix64(seed), |acc, &t| {
        mix64(acc ^ mix64(t.wrapping_add(GOLDEN_GAMMA)))
    })
}

/// Stream tags. Distinct constants keep the clique draw, the edge coins and
/// auxiliary draws (random S, fill sets) independent of one another.
pub mod stream {
    pub const CLIQUE: u64 = 0x636c_6971_7565; // "clique"
    pub const EDGES: u64 = 0x65_6467_6573; // "edges"
    pub const SUBSET: u64 = 0x7375_6273_6574; // "subset"
    pub const FILL: u64 = 0x6669_6c6c; // "fill"
    pub const MARKED: u64 = 0x6d61_726b_6564; // "marked"
    pub const COINS: u64 = 0x63_6f69_6e73; // "coins"
}

/// Arm index inside a detection cell.
pub const ARM_NULL: u64 = 0;
pub const ARM_PLANTED: u64 = 1;

/// Seed of one Monte Carlo trial: `derive(base, [cell, arm, trial])`.
pub fn trial_seed(base: u64, cell: u64, arm: u64, trial: u64) -> u64 {
    derive(base, &[cell, arm, trial])
}
