use std::sync::atomic::{AtomicU64, Ordering};

/// Default probe granularity: one modeled 64-byte cache line.
pub const CACHE_LINE_BITS: usize = 512;

/// Counts distinct aligned regions touched since the last reset.
///
/// A region is `granularity` bits wide and aligned to a multiple of its width.
/// Counting is lock-free so instrumented structures stay `Sync`; under
/// concurrent readers the count is best-effort.
#[derive(Debug)]
pub struct ProbeCounter {
    granularity: usize,
    touched: Box<[AtomicU64]>,
    count: AtomicU64,
}

impl ProbeCounter {
    /// A counter covering `total_bits` bits split into `granularity`-bit regions.
    pub fn new(total_bits: usize, granularity: usize) -> Self {
        let granularity = granularity.max(1);
        let regions = total_bits.div_ceil(granularity).max(1);
        let touched = (0..regions.div_ceil(64)).map(|_| AtomicU64::new(0)).collect();
        Self {
            granularity,
            touched,
            count: AtomicU64::new(0),
        }
    }

    pub fn granularity(&self) -> usize {
        self.granularity
    }

    /// Records an access to the bit at `bit_offset`.
    #[inline]
    pub fn touch(&self, bit_offset: usize) {
        let region = bit_offset / self.granularity;
        let (word, mask) = (region / 64, 1u64 << (region % 64));
        let Some(slot) = self.touched.get(word) else {
            return;
        };
        if slot.load(Ordering::Relaxed) & mask == 0
            && slot.fetch_or(mask, Ordering::Relaxed) & mask == 0
        {
            self.count.fetch_add(1, Ordering::Relaxed);
        }
    }

    /// Records an access to every region overlapping `[bit_offset, bit_offset + width)`.
    #[inline]
    pub fn touch_span(&self, bit_offset: usize, width: usize) {
        let first = bit_offset / self.granularity;
        let last = (bit_offset + width.max(1) - 1) / self.granularity;
        for region in first..=last {
            self.touch(region * self.granularity);
        }
    }

    pub fn reset(&self) {
        for w in self.touched.iter() {
            w.store(0, Ordering::Relaxed);
        }
        self.count.store(0, Ordering::Relaxed);
    }

    pub fn read(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

impl Clone for ProbeCounter {
    /// Clones start with a zeroed counter.
    fn clone(&self) -> Self {
        Self::new(self.touched.len() * 64 * self.granularity, self.granularity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_counter_reads_zero() {
        let p = ProbeCounter::new(4096, CACHE_LINE_BITS);
        p.reset();
        assert_eq!(p.read(), 0);
    }

    #[test]
    fn same_region_counts_once() {
        let p = ProbeCounter::new(4096, CACHE_LINE_BITS);
        p.touch(0);
        p.touch(3);
        assert_eq!(p.read(), 1);
    }

    #[test]
    fn distinct_regions_count_separately() {
        let p = ProbeCounter::new(4096, CACHE_LINE_BITS);
        p.touch(0);
        p.touch(600);
        assert_eq!(p.read(), 2);
        p.touch(0);
        assert_eq!(p.read(), 2);
        p.reset();
        assert_eq!(p.read(), 0);
    }

    #[test]
    fn span_crossing_boundary_touches_both() {
        let p = ProbeCounter::new(4096, CACHE_LINE_BITS);
        p.touch_span(510, 4);
        assert_eq!(p.read(), 2);
    }
}
