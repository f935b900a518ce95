//! Seeded hashing: the index family used by the bit-array filters and the
//! fingerprints used by the quotient and cuckoo filters.
//!
//! Every hash is XXH64 keyed by a 64-bit seed. Distinct roles derive their
//! key by XOR-ing the user seed with a fixed salt, so one stored seed is
//! enough to reproduce every hash a filter computes.

use xxhash_rust::xxh64::xxh64;

use crate::error::{invalid, Result};

/// Salt for the second base hash of the double-hashing scheme.
pub const SECOND_HASH_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
/// Salt for fingerprint derivation.
pub const FINGERPRINT_SALT: u64 = 0xc2b2_ae3d_27d4_eb4f;
/// Salt for the blocked filter's block selector.
pub const BLOCK_SALT: u64 = 0x1656_67b1_9e37_79f9;
/// Salt for the cuckoo primary bucket hash.
pub const BUCKET_SALT: u64 = 0x27d4_eb2f_1656_67c5;
/// Salt for the cuckoo alternate-bucket offset hash.
pub const ALT_BUCKET_SALT: u64 = 0x85eb_ca77_c2b2_ae63;

/// The keyed 64-bit base hash (XXH64).
#[inline]
pub fn base_hash(bytes: &[u8], seed: u64) -> u64 {
    xxh64(bytes, seed)
}

/// A family of `h` index functions over `[0, m)` built by double hashing:
/// `index_i = (g1 + i * g2) mod m` with `g2` forced odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashFamily {
    seed: u64,
    h: u32,
    m: u64,
}

impl HashFamily {
    pub fn new(seed: u64, h: u32, m: u64) -> Result<Self> {
        if h == 0 {
            return Err(invalid("hash count must be at least 1"));
        }
        if m == 0 {
            return Err(invalid("index range must be at least 1"));
        }
        Ok(Self { seed, h, m })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn hash_count(&self) -> u32 {
        self.h
    }

    pub fn range(&self) -> u64 {
        self.m
    }

    /// Same seed and hash count over a different index range.
    pub fn with_range(&self, m: u64) -> Result<Self> {
        Self::new(self.seed, self.h, m)
    }

    /// The two base hashes `(g1, g2)`; `g2` is always odd.
    #[inline]
    pub fn base_pair(&self, element: &[u8]) -> (u64, u64) {
        (
            base_hash(element, self.seed),
            base_hash(element, self.seed ^ SECOND_HASH_SALT) | 1,
        )
    }

    /// Lazily yields the `h` indices of `element`.
    #[inline]
    pub fn indices(&self, element: &[u8]) -> Indices {
        let (g1, g2) = self.base_pair(element);
        Indices {
            next: g1 % self.m,
            step: g2 % self.m,
            m: self.m,
            remaining: self.h,
        }
    }
}

/// Iterator over one element's hash indices.
#[derive(Debug, Clone)]
pub struct Indices {
    next: u64,
    step: u64,
    m: u64,
    remaining: u32,
}

impl Iterator for Indices {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let out = self.next;
        self.next = ((self.next as u128 + self.step as u128) % self.m as u128) as u64;
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining as usize, Some(self.remaining as usize))
    }
}

impl ExactSizeIterator for Indices {}

/// All `h` indices of `element` under `family`.
pub fn hash_indices(element: &[u8], family: &HashFamily) -> Vec<u64> {
    family.indices(element).collect()
}

/// A nonzero short digest of an element. Zero marks an empty slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    value: u32,
    width: u8,
}

impl Fingerprint {
    pub const MIN_WIDTH: u8 = 4;
    pub const MAX_WIDTH: u8 = 32;

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn width(&self) -> u8 {
        self.width
    }
}

/// `(hash(element) mod (2^width - 1)) + 1`, so the result is never zero.
pub fn make_fingerprint(element: &[u8], width: u8, seed: u64) -> Result<Fingerprint> {
    if !(Fingerprint::MIN_WIDTH..=Fingerprint::MAX_WIDTH).contains(&width) {
        return Err(invalid(format!(
            "fingerprint width {width} outside [{}, {}]",
            Fingerprint::MIN_WIDTH,
            Fingerprint::MAX_WIDTH
        )));
    }
    let modulus = (1u64 << width) - 1;
    let value = base_hash(element, seed ^ FINGERPRINT_SALT) % modulus + 1;
    Ok(Fingerprint {
        value: value as u32,
        width,
    })
}
