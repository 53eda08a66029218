//! Root-seed derivation.
//!
//! Every random stream in a pipeline is keyed as `(root, purpose, index)`:
//! FNV-1a over the purpose tag, mixed with the root and index through a
//! splitmix64 finalizer. Any stage can therefore be re-run in isolation and
//! reproduce its exact stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives a child seed from a root seed, a purpose tag, and an index.
pub fn derive_seed(root: u64, purpose: &str, index: u64) -> u64 {
    let mut tag = 0xcbf2_9ce4_8422_2325u64;
    for byte in purpose.bytes() {
        tag ^= u64::from(byte);
        tag = tag.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = root
        ^ tag.rotate_left(32)
        ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A deterministic generator for the derived stream.
pub fn rng_for(root: u64, purpose: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, purpose, index))
}
