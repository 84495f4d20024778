//! Seed derivation for replicated experiments.

/// SplitMix64 finaliser.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `replica_seed = splitmix64(root_seed ^ splitmix64(replica_index))`.
pub fn derive_seed(root_seed: u64, replica_index: u64) -> u64 {
    splitmix64(root_seed ^ splitmix64(replica_index))
}
