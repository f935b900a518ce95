use super::probe::{ProbeCounter, CACHE_LINE_BITS};

/// Fixed-length bit array with a running popcount and probe instrumentation.
#[derive(Debug, Clone)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
    ones: usize,
    probes: ProbeCounter,
}

impl BitVector {
    pub fn new(len: usize) -> Self {
        Self::with_granularity(len, CACHE_LINE_BITS)
    }

    /// Like [`BitVector::new`] but with a custom probe region width.
    pub fn with_granularity(len: usize, granularity: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
            ones: 0,
            probes: ProbeCounter::new(len, granularity),
        }
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Option<Self> {
        if words.len() != len.div_ceil(64) {
            return None;
        }
        if !len.is_multiple_of(64) {
            let tail = words[words.len() - 1] >> (len % 64);
            if tail != 0 {
                return None;
            }
        }
        let ones = words.iter().map(|w| w.count_ones() as usize).sum();
        Some(Self {
            words,
            len,
            ones,
            probes: ProbeCounter::new(len, CACHE_LINE_BITS),
        })
    }

    pub(crate) fn regranulated(mut self, granularity: usize) -> Self {
        self.probes = ProbeCounter::new(self.len, granularity);
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.probes.touch(i);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Sets bit `i`, returning true if it was previously clear.
    #[inline]
    pub fn set(&mut self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.probes.touch(i);
        let mask = 1u64 << (i % 64);
        let word = &mut self.words[i / 64];
        let fresh = *word & mask == 0;
        *word |= mask;
        self.ones += fresh as usize;
        fresh
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn fill_ratio(&self) -> f64 {
        if self.len == 0 {
            0.0
        } else {
            self.ones as f64 / self.len as f64
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Positions of set bits, in increasing order. Not instrumented.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    /// Uninstrumented read for bulk operations such as folding.
    pub(crate) fn peek(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn reset_probe_counter(&self) {
        self.probes.reset();
    }

    pub fn read_probe_counter(&self) -> u64 {
        self.probes.read()
    }

    pub fn probes(&self) -> &ProbeCounter {
        &self.probes
    }
}

impl PartialEq for BitVector {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.words == other.words
    }
}

impl Eq for BitVector {}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn set_and_get() {
        let mut v = BitVector::new(100);
        assert!(v.set(3));
        assert!(!v.set(3));
        assert!(v.get(3));
        assert!(!v.get(4));
        assert_eq!(v.count_ones(), 1);
    }

    #[test]
    #[should_panic]
    fn out_of_range_panics() {
        BitVector::new(10).get(10);
    }

    #[test]
    fn probe_examples() {
        let v = BitVector::new(1024);
        v.reset_probe_counter();
        assert_eq!(v.read_probe_counter(), 0);
        v.get(0);
        v.get(3);
        assert_eq!(v.read_probe_counter(), 1);
        v.reset_probe_counter();
        v.get(0);
        v.get(600);
        assert_eq!(v.read_probe_counter(), 2);
    }

    #[test]
    fn custom_granularity() {
        let v = BitVector::with_granularity(1024, 64);
        v.get(0);
        v.get(63);
        v.get(64);
        assert_eq!(v.read_probe_counter(), 2);
    }

    #[test]
    fn from_words_rejects_stray_tail_bits() {
        assert!(BitVector::from_words(10, vec![1 << 12]).is_none());
        assert!(BitVector::from_words(10, vec![1 << 9]).is_some());
        assert!(BitVector::from_words(10, vec![]).is_none());
    }

    proptest! {
        #[test]
        fn popcount_tracks_set_bits(idx in proptest::collection::vec(0usize..777, 0..200)) {
            let mut v = BitVector::new(777);
            for &i in &idx {
                v.set(i);
            }
            let distinct: std::collections::BTreeSet<_> = idx.iter().copied().collect();
            prop_assert_eq!(v.count_ones(), distinct.len());
            prop_assert_eq!(v.iter_ones().collect::<Vec<_>>(), distinct.into_iter().collect::<Vec<_>>());
        }
    }
}
