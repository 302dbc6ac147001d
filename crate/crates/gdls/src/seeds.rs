//! Per-trial seed derivation.

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed owned by one trial of one sweep point.
pub fn trial_seed(master: u64, point: usize, trial: usize) -> u64 {
    mix64(mix64(master ^ mix64(point as u64)).wrapping_add(trial as u64))
}
