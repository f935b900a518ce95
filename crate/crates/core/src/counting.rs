//! Counting Bloom filter: small saturating counters in place of bits, which
//! makes removal possible.
//!
//! Overflow policy is saturate-and-freeze. A counter that ever reaches its
//! maximum is never decremented again, so removals can leave residual false
//! positives but never create a false negative.

use crate::error::{invalid, InsertError, Result};
use crate::filter::{FilterKind, MembershipFilter};
use crate::hash::HashFamily;
use crate::storage::CounterVector;

pub const DEFAULT_COUNTER_WIDTH: u32 = 4;
pub const MIN_COUNTER_WIDTH: u32 = 2;
pub const MAX_COUNTER_WIDTH: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingBloomFilter {
    counters: CounterVector,
    family: HashFamily,
    live: u64,
}

impl CountingBloomFilter {
    /// `m` counters of the default 4-bit width.
    pub fn new(m: u64, h: u32, seed: u64) -> Result<Self> {
        Self::with_counter_width(m, h, seed, DEFAULT_COUNTER_WIDTH)
    }

    pub fn with_counter_width(m: u64, h: u32, seed: u64, width: u32) -> Result<Self> {
        if m < crate::bloom::MIN_BITS {
            return Err(invalid(format!("m = {m} is below the minimum of 8 counters")));
        }
        if !(1..=crate::bloom::MAX_HASHES).contains(&h) {
            return Err(invalid(format!("h = {h} outside [1, 32]")));
        }
        if !(MIN_COUNTER_WIDTH..=MAX_COUNTER_WIDTH).contains(&width) {
            return Err(invalid(format!("counter width {width} outside [2, 8]")));
        }
        Ok(Self {
            counters: CounterVector::new(m as usize, width),
            family: HashFamily::new(seed, h, m)?,
            live: 0,
        })
    }

    pub(crate) fn from_parts(family: HashFamily, counters: CounterVector, live: u64) -> Self {
        Self {
            counters,
            family,
            live,
        }
    }

    pub fn insert(&mut self, element: &[u8]) {
        for i in self.family.indices(element) {
            self.counters.increment(i as usize);
        }
        self.live += 1;
    }

    /// Decrements the element's counters if all are positive.
    ///
    /// Returns false, touching nothing, when some hashed counter is zero: the
    /// element is then provably absent. Removing an element that was never
    /// inserted is misuse the filter cannot detect in general.
    pub fn remove(&mut self, element: &[u8]) -> bool {
        let mut idx: Vec<usize> = self.family.indices(element).map(|i| i as usize).collect();
        idx.sort_unstable();
        // Repeated indices were incremented once per repeat; each needs that much headroom.
        for run in idx.chunk_by(|a, b| a == b) {
            let i = run[0];
            if !self.counters.is_saturated(i) && self.counters.get(i) < run.len() as u64 {
                return false;
            }
        }
        for &i in &idx {
            self.counters.decrement(i);
        }
        self.live = self.live.saturating_sub(1);
        true
    }

    pub fn contains(&self, element: &[u8]) -> bool {
        self.family
            .indices(element)
            .all(|i| self.counters.get(i as usize) > 0)
    }

    pub fn counters(&self) -> &CounterVector {
        &self.counters
    }

    pub fn family(&self) -> &HashFamily {
        &self.family
    }

    pub fn counter_width(&self) -> u32 {
        self.counters.width()
    }

    pub fn is_saturated(&self, i: usize) -> bool {
        self.counters.is_saturated(i)
    }

    pub fn saturated_count(&self) -> usize {
        (0..self.counters.len())
            .filter(|&i| self.counters.is_saturated(i))
            .count()
    }
}

impl MembershipFilter for CountingBloomFilter {
    fn kind(&self) -> FilterKind {
        FilterKind::Counting
    }

    fn try_insert(&mut self, element: &[u8]) -> Result<(), InsertError> {
        self.insert(element);
        Ok(())
    }

    fn contains(&self, element: &[u8]) -> bool {
        CountingBloomFilter::contains(self, element)
    }

    fn len(&self) -> u64 {
        self.live
    }

    fn storage_bits(&self) -> u64 {
        self.counters.storage_bits() as u64
    }

    fn reset_probe_counter(&self) {
        self.counters.reset_probe_counter();
    }

    fn read_probe_counter(&self) -> u64 {
        self.counters.read_probe_counter()
    }
}
