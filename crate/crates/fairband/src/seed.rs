//! Seed derivation for nested stochastic procedures.
//!
//! Every stochastic operation takes an explicit base seed. Sub-procedures
//! (bootstrap resamples, per-event permutations, per-λ pipelines) derive
//! their own stream seed from (base, index) so that results do not depend
//! on evaluation order.

/// splitmix64 finalizer; full-period mixing of a 64-bit state.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a base seed and a stream index.
pub(crate) fn derive(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream.wrapping_add(0x51ed_270b)))
}
