//! Seeded random substreams.
//!
//! All noise in an experiment derives from one 64-bit master seed. Each
//! (entity, reading-index) pair gets its own ChaCha stream whose seed is a
//! stable hash of the pair, so results do not depend on the order in which
//! households or timestamps are visited — and therefore not on thread
//! scheduling either.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Derives per-(entity, index) random substreams from a master seed.
#[derive(Debug, Clone, Copy)]
pub struct Substreams {
    master: u64,
}

impl Substreams {
    pub fn new(master: u64) -> Self {
        Substreams { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// The substream for one entity and one reading index.
    ///
    /// Identical (master, entity, index) triples yield bit-identical
    /// generators on every platform.
    pub fn rng_for(&self, entity: &str, index: u64) -> ChaCha12Rng {
        let h = fnv1a(entity.as_bytes());
        let seed = splitmix64(splitmix64(self.master ^ h) ^ index);
        ChaCha12Rng::seed_from_u64(seed)
    }
}

/// FNV-1a over bytes; stable across platforms, unlike `DefaultHasher`.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Sebastiano Vigna's splitmix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
