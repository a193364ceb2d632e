//! Per-job seed derivation.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for replica `replica` of sweep cell `cell`.
pub fn derive_seed(base: u64, cell: u64, replica: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ cell) ^ replica)
}
