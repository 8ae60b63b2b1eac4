//! Named, seed-derived random streams.
//!
//! Every random draw in the crate comes from a [`StreamRng`] obtained with
//! [`stream`]: the 64-bit experiment seed is mixed with a stream name and a
//! list of indices (tree number, image number, candidate number...), so the
//! draws of one consumer never depend on how many draws another consumer
//! made, nor on the order in which parallel work finishes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator behind every stream.
pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut h: u64, bytes: &[u8]) -> u64 {
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the 64-bit seed of the sub-stream `name[indices...]`.
pub fn derive_seed(seed: u64, name: &str, indices: &[u64]) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, name.as_bytes());
    for i in indices {
        h = fnv1a(h, &i.to_le_bytes());
    }
    splitmix64(seed ^ splitmix64(h))
}

/// Opens the sub-stream `name[indices...]` of `seed`.
pub fn stream(seed: u64, name: &str, indices: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, name, indices))
}
