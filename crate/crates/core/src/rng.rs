// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Named random sub-streams derived from a single root seed.
//!
//! Every stochastic component (layout, trial suggestions, shot sampling,
//! training) draws from its own stream, so adding draws in one place never
//! perturbs another and parallel work stays reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of stream `name`, instance `index`, under `root`.
pub fn derive_seed(root: u64, name: &str, index: u64) -> u64 {
    splitmix64(splitmix64(root ^ fnv1a(name.as_bytes())).wrapping_add(index))
}

pub fn stream(root: u64, name: &str, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(root, name, index))
}
