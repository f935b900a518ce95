//! Blocked Bloom filter: the bit array is split into cache-line-sized blocks
//! and every probe for an element lands in one block.

use crate::error::{invalid, InsertError, Result};
use crate::filter::{FilterKind, MembershipFilter};
use crate::hash::{base_hash, HashFamily, BLOCK_SALT};
use crate::storage::{BitVector, CACHE_LINE_BITS};

pub const DEFAULT_BLOCK_BITS: u32 = CACHE_LINE_BITS as u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockedBloomFilter {
    bits: BitVector,
    /// In-block index family; its range is `block_bits`.
    family: HashFamily,
    blocks: u64,
    inserted: u64,
}

impl BlockedBloomFilter {
    /// At least `m` bits in 512-bit blocks.
    pub fn new(m: u64, h: u32, seed: u64) -> Result<Self> {
        Self::with_block_bits(m, h, seed, DEFAULT_BLOCK_BITS)
    }

    /// At least `m` bits in blocks of `block_bits` (a power of two). The block
    /// count is rounded up.
    pub fn with_block_bits(m: u64, h: u32, seed: u64, block_bits: u32) -> Result<Self> {
        if !block_bits.is_power_of_two() || block_bits < 8 {
            return Err(invalid(format!(
                "block size {block_bits} must be a power of two of at least 8 bits"
            )));
        }
        if m < crate::bloom::MIN_BITS {
            return Err(invalid(format!("m = {m} is below the minimum of 8 bits")));
        }
        if !(1..=crate::bloom::MAX_HASHES).contains(&h) {
            return Err(invalid(format!("h = {h} outside [1, 32]")));
        }
        let blocks = m.div_ceil(block_bits as u64);
        let total = blocks * block_bits as u64;
        Ok(Self {
            bits: BitVector::with_granularity(total as usize, block_bits as usize),
            family: HashFamily::new(seed, h, block_bits as u64)?,
            blocks,
            inserted: 0,
        })
    }

    pub(crate) fn from_parts(
        seed: u64,
        h: u32,
        block_bits: u32,
        bits: Vec<u64>,
        total: u64,
        inserted: u64,
    ) -> Option<Self> {
        if !block_bits.is_power_of_two() || block_bits < 8 || !total.is_multiple_of(block_bits as u64) {
            return None;
        }
        let mut filter = Self::with_block_bits(total, h, seed, block_bits).ok()?;
        filter.bits = BitVector::from_words(total as usize, bits)?.regranulated(block_bits as usize);
        filter.inserted = inserted;
        Some(filter)
    }

    /// Index of the block `element` maps to.
    pub fn block_of(&self, element: &[u8]) -> u64 {
        base_hash(element, self.family.seed() ^ BLOCK_SALT) % self.blocks
    }

    /// Absolute bit positions probed for `element`, all within one block.
    pub fn positions(&self, element: &[u8]) -> impl Iterator<Item = usize> + '_ {
        let base = self.block_of(element) * self.block_bits() as u64;
        self.family
            .indices(element)
            .map(move |i| (base + i) as usize)
    }

    pub fn insert(&mut self, element: &[u8]) {
        let base = self.block_of(element) * self.block_bits() as u64;
        for i in self.family.indices(element) {
            self.bits.set((base + i) as usize);
        }
        self.inserted += 1;
    }

    pub fn contains(&self, element: &[u8]) -> bool {
        self.positions(element).all(|i| self.bits.get(i))
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn block_bits(&self) -> u32 {
        self.family.range() as u32
    }

    pub fn block_count(&self) -> u64 {
        self.blocks
    }

    pub fn bit_len(&self) -> u64 {
        self.blocks * self.block_bits() as u64
    }

    pub fn hash_count(&self) -> u32 {
        self.family.hash_count()
    }

    pub fn seed(&self) -> u64 {
        self.family.seed()
    }

    pub fn inserted(&self) -> u64 {
        self.inserted
    }
}

impl MembershipFilter for BlockedBloomFilter {
    fn kind(&self) -> FilterKind {
        FilterKind::Blocked
    }

    fn try_insert(&mut self, element: &[u8]) -> Result<(), InsertError> {
        self.insert(element);
        Ok(())
    }

    fn contains(&self, element: &[u8]) -> bool {
        BlockedBloomFilter::contains(self, element)
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::predicted_fpr;

    #[test]
    fn rounds_block_count_up() {
        let f = BlockedBloomFilter::new(1000, 3, 0).unwrap();
        assert_eq!(f.block_count(), 2);
        assert_eq!(f.bit_len(), 1024);
        assert!(BlockedBloomFilter::with_block_bits(1000, 3, 0, 500).is_err());
    }

    #[test]
    fn insert_stays_in_one_block() {
        let mut f = BlockedBloomFilter::new(1 << 14, 6, 4).unwrap();
        f.insert(b"x");
        let b = f.block_of(b"x") as usize;
        assert!(f.bits().iter_ones().all(|i| i / 512 == b));
        assert!(f.contains(b"x"));
    }

    #[test]
    fn idempotent_insert() {
        let mut a = BlockedBloomFilter::new(4096, 4, 4).unwrap();
        let mut b = a.clone();
        a.insert(b"x");
        b.insert(b"x");
        b.insert(b"x");
        assert_eq!(a.bits(), b.bits());
    }

    #[test]
    fn empty_is_negative_and_one_probe_per_query() {
        let mut f = BlockedBloomFilter::new(1 << 16, 5, 4).unwrap();
        assert!(!f.contains(b"q"));
        for i in 0..3000u32 {
            f.insert(&i.to_le_bytes());
        }
        for i in 0..5000u32 {
            f.reset_probe_counter();
            f.contains(format!("neg{i}").as_bytes());
            assert_eq!(f.read_probe_counter(), 1);
        }
    }

    #[test]
    fn fpr_exceeds_flat_prediction_by_at_most_two() {
        let n = 10_000u64;
        let mut f = BlockedBloomFilter::new(100_000, 5, 21).unwrap();
        for i in 0..n {
            f.insert(format!("ins:{i}").as_bytes());
        }
        let q = 100_000;
        let hits = (0..q)
            .filter(|i| f.contains(format!("qry:{i}").as_bytes()))
            .count();
        let measured = hits as f64 / q as f64;
        let flat = predicted_fpr(f.bit_len(), 5, n).unwrap().approximate;
        assert!(measured > flat, "blocked {measured} vs flat {flat}");
        assert!(measured <= 2.0 * flat, "blocked {measured} vs flat {flat}");
    }
}
