//! Keyed random streams.
//!
//! Every individual of a genealogy owns a generator keyed by its Ulam label,
//! so results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Stream = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key of the root individual of sample `sample` under run seed `seed`.
#[inline]
pub fn root_key(seed: u64, sample: u64) -> u64 {
    mix64(mix64(seed ^ GOLDEN).wrapping_add(sample.wrapping_mul(GOLDEN)))
}

/// Key of the `index`-th child (1-based) of the individual with key `parent`.
#[inline]
pub fn child_key(parent: u64, index: u32) -> u64 {
    mix64(parent ^ mix64((index as u64).wrapping_mul(GOLDEN).wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// Key for an auxiliary purpose (e.g. a second sample side) derived from a base key.
#[inline]
pub fn tagged_key(base: u64, tag: &str) -> u64 {
    tag.bytes().fold(mix64(base), |k, b| mix64(k ^ b as u64))
}

#[inline]
pub fn stream(key: u64) -> Stream {
    Xoshiro256PlusPlus::seed_from_u64(key)
}
