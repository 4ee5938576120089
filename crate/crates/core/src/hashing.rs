//! Seeded position and checksum hashes.
//!
//! Every hash is derived from one 64-bit mixing digest,
//!
//! ```text
//! mix(z)               = splitmix64 finalizer of z
//! digest(seed, lane, x) = mix(mix(seed ^ lane * 0x9E3779B97F4A7C15) ^ mix(x))
//! ```
//!
//! where `lane` separates the `k` position hashes (`lane = i`) from the
//! checksum (`lane = CHECKSUM_LANE`). The position inside subtable `i` is
//! `(digest * subtable_size) >> 64`. For a power-of-two subtable of size
//! `2^r` this is the top `r` digest bits, so doubling the subtable turns
//! position `h` into `2h + b` where `b` is the next digest bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
/// Lane used for the checksum hash `H`.
pub const CHECKSUM_LANE: u64 = u64::MAX;
/// Lane used when deriving per-trial seeds.
pub const SEED_LANE: u64 = u64::MAX - 1;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn digest(seed: u64, lane: u64, x: u64) -> u64 {
    mix64(mix64(seed ^ lane.wrapping_mul(GOLDEN_GAMMA)) ^ mix64(x))
}

/// Seed for the `index`-th independent sub-run of a run seeded with `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    digest(master, SEED_LANE, index)
}

/// Hash configuration shared by all parties of a reconciliation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HashConfig {
    k: usize,
    subtable_size: usize,
    position_seed: u64,
    checksum_seed: u64,
    q: u64,
}

impl HashConfig {
    pub fn new(
        k: usize,
        subtable_size: usize,
        position_seed: u64,
        checksum_seed: u64,
        q: u64,
    ) -> Result<Self> {
        if !(3..=7).contains(&k) {
            return Err(Error::UnsupportedK(k));
        }
        if subtable_size == 0 || subtable_size > u32::MAX as usize {
            return Err(Error::InvalidSize(format!("subtable size {subtable_size}")));
        }
        if q < 2 || !q.is_power_of_two() {
            return Err(Error::InvalidChecksumRange(q));
        }
        Ok(HashConfig {
            k,
            subtable_size,
            position_seed,
            checksum_seed,
            q,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn subtable_size(&self) -> usize {
        self.subtable_size
    }

    /// Total number of cells, `k * subtable_size`.
    pub fn cells(&self) -> usize {
        self.k * self.subtable_size
    }

    pub fn position_seed(&self) -> u64 {
        self.position_seed
    }

    pub fn checksum_seed(&self) -> u64 {
        self.checksum_seed
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Same seeds and `k`, with twice the subtable size.
    pub fn doubled(&self) -> Result<Self> {
        HashConfig::new(
            self.k,
            self.subtable_size * 2,
            self.position_seed,
            self.checksum_seed,
            self.q,
        )
    }

    /// Position of `key` inside subtable `i` (not offset by the subtable base).
    #[inline]
    pub fn local_position(&self, key: u64, i: usize) -> usize {
        let d = digest(self.position_seed, i as u64, key);
        ((d as u128 * self.subtable_size as u128) >> 64) as usize
    }

    /// The `k` global cell indices of `key`, one per subtable.
    pub fn cell_positions(&self, key: u64) -> Vec<usize> {
        let mut out = vec![0; self.k];
        self.positions_into(key, &mut out);
        out
    }

    #[inline]
    pub(crate) fn positions_into(&self, key: u64, out: &mut [usize]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = i * self.subtable_size + self.local_position(key, i);
        }
    }

    /// True when global cell `cell` is one of the positions of `key`.
    #[inline]
    pub fn hits(&self, key: u64, cell: usize) -> bool {
        let i = cell / self.subtable_size;
        i < self.k && self.local_position(key, i) == cell % self.subtable_size
    }

    /// The checksum `H(key)` in `[0, q)`.
    #[inline]
    pub fn checksum(&self, key: u64) -> u64 {
        digest(self.checksum_seed, CHECKSUM_LANE, key) & (self.q - 1)
    }
}
