//! Seed derivation so that results do not depend on scheduling.

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one sweep cell, from the master seed, grid index and repetition.
pub fn cell_seed(master: u64, param_index: usize, repetition: usize) -> u64 {
    let h = splitmix64(master);
    let h = splitmix64(h ^ param_index as u64);
    splitmix64(h ^ (repetition as u64).rotate_left(32))
}

/// Independent sub-stream `k` of a cell seed.
pub fn stream(seed: u64, k: u64) -> u64 {
    splitmix64(seed ^ splitmix64(k.wrapping_add(0x5EED)))
}
