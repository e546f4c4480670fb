//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded from a
//! 64-bit value. Child seeds are derived with [`mix`], a SplitMix64
//! finalizer applied to the parent seed and a child index, so that adding
//! trials or grid cells never changes the seeds of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of child `index` from `parent`.
pub fn mix(parent: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ index.wrapping_mul(GOLDEN))
}

/// Derives a seed from a path of indices, e.g. the grid coordinates of a
/// sweep cell.
pub fn mix_path(parent: u64, path: &[u64]) -> u64 {
    path.iter().fold(parent, |acc, &i| mix(acc, i))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Stream labels, so the structure and cost streams of one run never alias.
pub(crate) const STRUCTURE_STREAM: u64 = 0x5354_5255;
pub(crate) const TRIAL_STREAM: u64 = 0x5452_4941;
pub const DISTRIBUTION_STREAM: u64 = 0x4449_5354;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_mix_is_stable() {
        // Frozen so that published seeds keep reproducing the same runs.
        assert_eq!(mix(0, 0), 0xa706_dd2f_4d19_7e6f);
        assert_eq!(mix(42, 7), 0xc48f_0724_6123_7b34);
        assert_eq!(mix_path(7, &[1, 2]), 0x86e2_3679_9c4f_1001);
        assert_ne!(mix(0, 0), mix(0, 1));
        assert_ne!(mix(1, 0), mix(0, 1));
        assert_eq!(mix_path(7, &[]), 7);
        assert_eq!(mix_path(7, &[1, 2]), mix(mix(7, 1), 2));
    }
}
