//! Seeded randomness.
//!
//! Every stochastic component draws from its own `Pcg64Mcg` stream (PCG,
//! 128-bit MCG state, XSL-RR output). Stream seeds are derived from a master
//! seed and a textual label:
//!
//! ```text
//! derive_seed(master, label) = splitmix64(master ^ fnv1a64(label))
//! ```
//!
//! so adding a new labelled component never shifts an existing stream.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

pub type StreamRng = Pcg64Mcg;

pub fn stream(seed: u64) -> StreamRng {
    Pcg64Mcg::seed_from_u64(seed)
}

/// 64-bit FNV-1a over the UTF-8 bytes of `label`.
pub fn fnv1a64(label: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    label.bytes().fold(OFFSET, |h, b| (h ^ b as u64).wrapping_mul(PRIME))
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, label: &str) -> u64 {
    splitmix64(master ^ fnv1a64(label))
}

/// Seed for the `index`-th item of a per-item stream family (one stream per
/// test image, for example).
pub fn item_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}
