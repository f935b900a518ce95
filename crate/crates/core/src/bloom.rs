//! The standard Bloom filter: `m` bits, `h` index functions, insert and query.

use crate::error::{invalid, InsertError, Result};
use crate::filter::{FilterKind, MembershipFilter};
use crate::hash::HashFamily;
use crate::storage::BitVector;

pub const MIN_BITS: u64 = 8;
pub const MAX_HASHES: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BloomFilter {
    bits: BitVector,
    family: HashFamily,
    inserted: u64,
}

impl BloomFilter {
    /// An empty filter of `m` bits using `h` hash functions.
    pub fn new(m: u64, h: u32, seed: u64) -> Result<Self> {
        if m < MIN_BITS {
            return Err(invalid(format!("m = {m} is below the minimum of {MIN_BITS} bits")));
        }
        if !(1..=MAX_HASHES).contains(&h) {
            return Err(invalid(format!("h = {h} outside [1, {MAX_HASHES}]")));
        }
        Ok(Self::with_family(HashFamily::new(seed, h, m)?))
    }

    /// Unchecked sizing, for sub-filters that may be smaller than [`MIN_BITS`].
    pub(crate) fn with_family(family: HashFamily) -> Self {
        Self {
            bits: BitVector::new(family.range() as usize),
            family,
            inserted: 0,
        }
    }

    pub(crate) fn from_parts(family: HashFamily, bits: BitVector, inserted: u64) -> Self {
        debug_assert_eq!(bits.len() as u64, family.range());
        Self {
            bits,
            family,
            inserted,
        }
    }

    pub fn insert(&mut self, element: &[u8]) {
        for i in self.family.indices(element) {
            self.bits.set(i as usize);
        }
        self.inserted += 1;
    }

    /// True iff every hashed bit is set. Stops at the first clear bit.
    pub fn contains(&self, element: &[u8]) -> bool {
        self.family
            .indices(element)
            .all(|i| self.bits.get(i as usize))
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn family(&self) -> &HashFamily {
        &self.family
    }

    pub fn bit_len(&self) -> u64 {
        self.family.range()
    }

    pub fn hash_count(&self) -> u32 {
        self.family.hash_count()
    }

    pub fn seed(&self) -> u64 {
        self.family.seed()
    }

    /// Insert calls so far, duplicates included.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn popcount(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn fill_ratio(&self) -> f64 {
        self.bits.fill_ratio()
    }
}

impl MembershipFilter for BloomFilter {
    fn kind(&self) -> FilterKind {
        FilterKind::Bloom
    }

    fn try_insert(&mut self, element: &[u8]) -> Result<(), InsertError> {
        self.insert(element);
        Ok(())
    }

    fn contains(&self, element: &[u8]) -> bool {
        BloomFilter::contains(self, element)
    }

    fn len(&self) -> u64 {
        self.inserted
    }

    fn storage_bits(&self) -> u64 {
        self.bit_len()
    }

    fn reset_probe_counter(&self) {
        self.bits.reset_probe_counter();
    }

    fn read_probe_counter(&self) -> u64 {
        self.bits.read_probe_counter()
    }
}
