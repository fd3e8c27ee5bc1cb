// SPDX-License-Identifier: Apache-2.0

//! Seed derivation. Every path gets its own seed from `(base, index)` so that
//! results do not depend on which worker runs which path.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of path `index` in an experiment with seed `base`.
pub fn path_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index.wrapping_add(0x6a09_e667_f3bc_c909)))
}
