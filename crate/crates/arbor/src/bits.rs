//! Hashing for f64 bit patterns. Value-index maps sit on the hot path of
//! stats collection and list filtering; the default SipHash costs more than
//! the table walk itself, so u64 keys go through a splitmix finalizer
//! instead. Keys are full bit patterns (never NaN, -0.0 normalized away),
//! so equality and hashing agree with numeric equality.

use std::collections::{HashMap, HashSet};
use std::hash::{BuildHasherDefault, Hasher};

pub(crate) type BitsMap<V> = HashMap<u64, V, BuildHasherDefault<BitsHasher>>;
pub(crate) type BitsSet = HashSet<u64, BuildHasherDefault<BitsHasher>>;

#[derive(Default)]
pub(crate) struct BitsHasher(u64);

impl Hasher for BitsHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        // not used by u64 keys; FNV fallback keeps the type total
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x100_0000_01b3);
        }
    }

    fn write_u64(&mut self, n: u64) {
        let mut z = n.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        self.0 = z ^ (z >> 31);
    }
}
