use super::packed::PackedArray;
use super::probe::{ProbeCounter, CACHE_LINE_BITS};

/// Fixed-width saturating counters.
///
/// A counter that reaches its maximum is saturated and stays there: the
/// saturation flag is exactly `value == max`, so it costs no extra storage.
#[derive(Debug, Clone)]
pub struct CounterVector {
    cells: PackedArray,
    probes: ProbeCounter,
}

impl CounterVector {
    pub fn new(len: usize, width: u32) -> Self {
        Self::from_cells(PackedArray::new(len, width))
    }

    pub(crate) fn from_cells(cells: PackedArray) -> Self {
        let probes = ProbeCounter::new(cells.storage_bits(), CACHE_LINE_BITS);
        Self { cells, probes }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.cells.width()
    }

    pub fn max_value(&self) -> u64 {
        (1u64 << self.cells.width()) - 1
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        self.probes
            .touch_span(i * self.width() as usize, self.width() as usize);
        self.cells.get(i)
    }

    pub fn is_saturated(&self, i: usize) -> bool {
        self.cells.get(i) == self.max_value()
    }

    /// Increments counter `i`, clamping at the maximum.
    pub fn increment(&mut self, i: usize) {
        self.probes
            .touch_span(i * self.width() as usize, self.width() as usize);
        let v = self.cells.get(i);
        if v < self.max_value() {
            self.cells.set(i, v + 1);
        }
    }

    /// Decrements counter `i` unless it is zero or saturated.
    pub fn decrement(&mut self, i: usize) {
        self.probes
            .touch_span(i * self.width() as usize, self.width() as usize);
        let v = self.cells.get(i);
        if v > 0 && v < self.max_value() {
            self.cells.set(i, v - 1);
        }
    }

    /// Counter values in index order. Not instrumented.
    pub fn values(&self) -> Vec<u64> {
        (0..self.len()).map(|i| self.cells.get(i)).collect()
    }

    pub fn cells(&self) -> &PackedArray {
        &self.cells
    }

    pub fn storage_bits(&self) -> usize {
        self.cells.storage_bits()
    }

    pub fn reset_probe_counter(&self) {
        self.probes.reset();
    }

    pub fn read_probe_counter(&self) -> u64 {
        self.probes.read()
    }
}

impl PartialEq for CounterVector {
    fn eq(&self, other: &Self) -> bool {
        self.cells == other.cells
    }
}

impl Eq for CounterVector {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturates_and_freezes() {
        let mut c = CounterVector::new(8, 4);
        for _ in 0..20 {
            c.increment(2);
        }
        assert_eq!(c.get(2), 15);
        assert!(c.is_saturated(2));
        c.decrement(2);
        assert_eq!(c.get(2), 15);
    }

    #[test]
    fn decrement_at_zero_is_noop() {
        let mut c = CounterVector::new(8, 3);
        c.decrement(0);
        assert_eq!(c.get(0), 0);
        c.increment(0);
        c.decrement(0);
        assert_eq!(c.get(0), 0);
    }
}
