//! Deterministic per-item randomness.
//!
//! Sampling decisions and shard assignments are driven by hashes of
//! (seed, item id) rather than a sequential RNG, so outcomes depend only on
//! the seed and the item — never on evaluation order. This is also what
//! lets simulated sites resample consistently from shared randomness.

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a seed with a stream tag.
pub fn mix(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

/// Uniform draw in [0, 1) determined by (seed, index).
pub fn coin(seed: u64, index: u64) -> f64 {
    let bits = splitmix64(seed ^ splitmix64(index.wrapping_add(0x51_7C_C1_B7_27_22_0A_95)));
    (bits >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Uniform draw in [0, 1) determined by (seed, a, b) — used where the item
/// identity is a vertex pair.
pub fn coin_pair(seed: u64, a: u64, b: u64) -> f64 {
    let bits = splitmix64(mix(seed, a) ^ splitmix64(b.wrapping_add(0xA24B_AED4_963E_E407)));
    (bits >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}
