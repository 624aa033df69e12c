//! Master-seed splitting.
//!
//! Every randomized stage of a run (each DAC clock, each sweep point) gets its
//! own RNG seed derived from the run's master seed, so runs are reproducible
//! and stages stay statistically independent.

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for stage `stream` from `master`.
///
/// One splitmix64 step per stream index; documented in run manifests so any
/// stage can be reproduced in isolation.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix(master.wrapping_add((stream.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}
