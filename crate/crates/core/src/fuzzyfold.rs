//! Fuzzy-folded Bloom filter.
//!
//! Two active sub-filters take inserts in turn until both reach the fill
//! threshold. They are then folded position by position into a layer of
//! 2-bit ordered-pair codes `(first, second)` and replaced by two empty
//! sub-filters of half their size. A layer answers a query if either side
//! alone has all of the element's bits set, with indices recomputed over the
//! layer's bucket count.

use crate::bloom::BloomFilter;
use crate::error::{invalid, InsertError, Result};
use crate::filter::{FilterKind, MembershipFilter};
use crate::hash::HashFamily;
use crate::storage::{BitVector, PackedArray, ProbeCounter, CACHE_LINE_BITS};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// One folded generation: `bucket_count` ordered-pair codes.
#[derive(Debug, Clone)]
pub struct FoldedLayer {
    cells: PackedArray,
    generation: u32,
    probes: ProbeCounter,
}

impl FoldedLayer {
    /// Pairs `first` and `second` bit by bit. Both must have the same length.
    pub fn fold(first: &BitVector, second: &BitVector, generation: u32) -> Self {
        assert_eq!(first.len(), second.len(), "folded arrays differ in length");
        let mut cells = PackedArray::new(first.len(), 2);
        for i in 0..first.len() {
            let code = (first.peek(i) as u64) << 1 | second.peek(i) as u64;
            if code != 0 {
                cells.set(i, code);
            }
        }
        Self::from_cells(cells, generation)
    }

    fn from_cells(cells: PackedArray, generation: u32) -> Self {
        Self {
            probes: ProbeCounter::new(cells.storage_bits(), CACHE_LINE_BITS),
            cells,
            generation,
        }
    }

    pub(crate) fn from_words(len: usize, generation: u32, words: Vec<u64>) -> Option<Self> {
        PackedArray::from_words(len, 2, words).map(|cells| Self::from_cells(cells, generation))
    }

    pub fn bucket_count(&self) -> usize {
        self.cells.len()
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    /// The `(first, second)` bits stored at bucket `i`.
    pub fn code(&self, i: usize) -> (bool, bool) {
        let c = self.cells.get(i);
        (c & 2 != 0, c & 1 != 0)
    }

    pub fn words(&self) -> &[u64] {
        self.cells.words()
    }

    /// Recovers the pre-fold arrays.
    pub fn unfold(&self) -> (BitVector, BitVector) {
        let mut a = BitVector::new(self.bucket_count());
        let mut b = BitVector::new(self.bucket_count());
        for i in 0..self.bucket_count() {
            let (x, y) = self.code(i);
            if x {
                a.set(i);
            }
            if y {
                b.set(i);
            }
        }
        (a, b)
    }

    fn matches(&self, family: &HashFamily, element: &[u8]) -> bool {
        let mut side_a = true;
        let mut side_b = true;
        for i in family.indices(element) {
            let i = i as usize;
            self.probes.touch(i * 2);
            let (x, y) = self.code(i);
            side_a &= x;
            side_b &= y;
            if !side_a && !side_b {
                return false;
            }
        }
        true
    }
}

impl PartialEq for FoldedLayer {
    fn eq(&self, other: &Self) -> bool {
        self.generation == other.generation && self.cells == other.cells
    }
}

/// Which part of the filter a query consulted, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryStage {
    ActiveSecond,
    ActiveFirst,
    Layer(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyFoldedFilter {
    m: u64,
    family: HashFamily,
    threshold: f64,
    first: BloomFilter,
    second: BloomFilter,
    layers: Vec<FoldedLayer>,
    inserted: u64,
}

impl FuzzyFoldedFilter {
    /// Budget of `m` bits split into two active halves, fold threshold 0.5.
    pub fn new(m: u64, h: u32, seed: u64) -> Result<Self> {
        Self::with_threshold(m, h, seed, DEFAULT_THRESHOLD)
    }

    /// `threshold` is the fill ratio in `(0, 1]` at which a sub-filter stops
    /// taking inserts. At 1.0 the first sub-filter never fills in practice.
    pub fn with_threshold(m: u64, h: u32, seed: u64, threshold: f64) -> Result<Self> {
        if !(1..=crate::bloom::MAX_HASHES).contains(&h) {
            return Err(invalid(format!("h = {h} outside [1, 32]")));
        }
        if m / 2 < h as u64 || m < crate::bloom::MIN_BITS {
            return Err(invalid(format!("m = {m} too small for h = {h}")));
        }
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(invalid(format!("threshold {threshold} outside (0, 1]")));
        }
        let family = HashFamily::new(seed, h, m / 2)?;
        Ok(Self {
            m,
            threshold,
            first: BloomFilter::with_family(family),
            second: BloomFilter::with_family(family),
            family,
            layers: Vec::new(),
            inserted: 0,
        })
    }

    pub(crate) fn from_parts(
        m: u64,
        h: u32,
        seed: u64,
        threshold: f64,
        layers: Vec<FoldedLayer>,
        active: [(Vec<u64>, u64); 2],
        inserted: u64,
    ) -> Option<Self> {
        let mut filter = Self::with_threshold(m, h, seed, threshold).ok()?;
        let mut size = m / 2;
        for (g, layer) in layers.iter().enumerate() {
            if layer.generation() as usize != g || layer.bucket_count() as u64 != size {
                return None;
            }
            size /= 2;
        }
        if size < h as u64 {
            return None;
        }
        let family = filter.family.with_range(size).ok()?;
        let [(a_words, a_n), (b_words, b_n)] = active;
        filter.first =
            BloomFilter::from_parts(family, BitVector::from_words(size as usize, a_words)?, a_n);
        filter.second =
            BloomFilter::from_parts(family, BitVector::from_words(size as usize, b_words)?, b_n);
        filter.layers = layers;
        filter.inserted = inserted;
        Some(filter)
    }

    pub fn budget_bits(&self) -> u64 {
        self.m
    }

    pub fn hash_count(&self) -> u32 {
        self.family.hash_count()
    }

    pub fn seed(&self) -> u64 {
        self.family.seed()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Completed folds.
    pub fn fold_count(&self) -> u32 {
        self.layers.len() as u32
    }

    /// Current size of each active sub-filter in bits.
    pub fn sub_size(&self) -> u64 {
        self.first.bit_len()
    }

    pub fn active_first(&self) -> &BloomFilter {
        &self.first
    }

    pub fn active_second(&self) -> &BloomFilter {
        &self.second
    }

    pub fn layers(&self) -> &[FoldedLayer] {
        &self.layers
    }

    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    /// Folds the active pair into a new layer and allocates two empty
    /// sub-filters of half the size. Refuses, leaving the filter unchanged,
    /// if the new sub-filters would hold fewer than `h` bits.
    pub fn fold(&mut self) -> Result<(), InsertError> {
        let next = self.sub_size() / 2;
        if next < self.hash_count() as u64 {
            return Err(InsertError::CapacityExhausted);
        }
        let layer = FoldedLayer::fold(self.first.bits(), self.second.bits(), self.fold_count());
        self.layers.push(layer);
        let family = self
            .family
            .with_range(next)
            .expect("next sub-size is at least h > 0");
        self.first = BloomFilter::with_family(family);
        self.second = BloomFilter::with_family(family);
        Ok(())
    }

    pub fn insert(&mut self, element: &[u8]) -> Result<(), InsertError> {
        if self.first.fill_ratio() < self.threshold {
            self.first.insert(element);
        } else if self.second.fill_ratio() < self.threshold {
            self.second.insert(element);
        } else {
            self.fold()?;
            self.first.insert(element);
        }
        self.inserted += 1;
        Ok(())
    }

    pub fn contains(&self, element: &[u8]) -> bool {
        self.contains_traced(element, |_| {})
    }

    /// Like [`contains`](Self::contains), reporting each stage as it is consulted.
    pub fn contains_traced(&self, element: &[u8], mut visit: impl FnMut(QueryStage)) -> bool {
        visit(QueryStage::ActiveSecond);
        if self.second.contains(element) {
            return true;
        }
        visit(QueryStage::ActiveFirst);
        if self.first.contains(element) {
            return true;
        }
        for layer in self.layers.iter().rev() {
            visit(QueryStage::Layer(layer.generation()));
            let family = self
                .family
                .with_range(layer.bucket_count() as u64)
                .expect("layers are never empty");
            if layer.matches(&family, element) {
                return true;
            }
        }
        false
    }

    pub fn storage_bits(&self) -> u64 {
        2 * self.sub_size() + self.layers.iter().map(|l| 2 * l.bucket_count() as u64).sum::<u64>()
    }
}

impl MembershipFilter for FuzzyFoldedFilter {
    fn kind(&self) -> FilterKind {
        FilterKind::FuzzyFolded
    }

    fn try_insert(&mut self, element: &[u8]) -> Result<(), InsertError> {
        self.insert(element)
    }

    fn contains(&self, element: &[u8]) -> bool {
        FuzzyFoldedFilter::contains(self, element)
    }

    fn len(&self) -> u64 {
        self.inserted
    }

    fn storage_bits(&self) -> u64 {
        FuzzyFoldedFilter::storage_bits(self)
    }

    fn reset_probe_counter(&self) {
        self.first.reset_probe_counter();
        self.second.reset_probe_counter();
        for l in &self.layers {
            l.probes.reset();
        }
    }

    fn read_probe_counter(&self) -> u64 {
        self.first.read_probe_counter()
            + self.second.read_probe_counter()
            + self.layers.iter().map(|l| l.probes.read()).sum::<u64>()
    }
}

/// Elements `filter` accepts before its false positive rate on `queries`
/// held-out elements exceeds `target`, measured every `step` inserts.
///
/// Inserts `ins:<i>` and queries `qry:<j>`. Query answers only ever flip
/// from false to true, so only still-negative queries are re-checked.
pub fn capacity_until_fpr<F: MembershipFilter>(
    filter: &mut F,
    target: f64,
    queries: usize,
    step: usize,
) -> u64 {
    let budget = (target * queries as f64).floor() as usize;
    let mut negatives: Vec<Vec<u8>> = (0..queries)
        .map(|j| format!("qry:{j}").into_bytes())
        .filter(|q| !filter.contains(q))
        .collect();
    if queries - negatives.len() > budget {
        return 0;
    }
    let mut accepted = 0u64;
    let mut i = 0u64;
    loop {
        for _ in 0..step {
            if filter.try_insert(format!("ins:{i}").as_bytes()).is_err() {
                return accepted;
            }
            i += 1;
        }
        negatives.retain(|q| !filter.contains(q));
        if queries - negatives.len() > budget {
            return accepted;
        }
        accepted = i;
    }
}

/// Predicted capacity of a fuzzy-folded filter with fill threshold `t`
/// before the combined false positive rate reaches `target`.
///
/// Sub-filters fill in order (two of `m/2` bits, two of `m/4`, ...). A
/// sub-filter at fill `x` answers positive with probability `x^h`, and the
/// stages are treated as independent.
pub fn predicted_fold_capacity(m: u64, h: u32, t: f64, target: f64) -> f64 {
    let h_f = h as f64;
    let per_bit = |size: f64, fill: f64| -size * (-fill).ln_1p() / h_f;
    let mut pass = 1.0;
    let mut elements = 0.0;
    let mut size = (m / 2) as f64;
    while size >= h_f {
        for _ in 0..2 {
            // Solve 1 - pass·(1 - x^h) = target for this sub-filter's fill x.
            let need = 1.0 - (1.0 - target) / pass;
            if need <= 0.0 {
                return elements;
            }
            let x = need.powf(1.0 / h_f);
            if x < t {
                return elements + per_bit(size, x);
            }
            elements += per_bit(size, t);
            pass *= 1.0 - t.powf(h_f);
        }
        size = (size / 2.0).floor();
    }
    elements
}

/// The fill threshold in `[0.05, 0.95]` maximizing [`predicted_fold_capacity`].
pub fn best_threshold(m: u64, h: u32, target: f64) -> f64 {
    (10..=190)
        .map(|k| k as f64 / 200.0)
        .map(|t| (t, predicted_fold_capacity(m, h, t, target)))
        .fold((DEFAULT_THRESHOLD, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0
}

/// Capacity of a fuzzy-folded filter divided by that of a standard Bloom
/// filter of `m` bits, both filled until the measured false positive rate
/// exceeds `target`. The fold threshold is [`best_threshold`].
pub fn capacity_ratio_benchmark(m: u64, h: u32, target: f64, seed: u64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(invalid(format!("target {target} outside (0, 1)")));
    }
    let threshold = best_threshold(m, h, target);
    let mut fuzzy = FuzzyFoldedFilter::with_threshold(m, h, seed, threshold)?;
    let mut flat = BloomFilter::new(m, h, seed)?;
    let (queries, step) = (50_000, (m / 2048).max(1) as usize);
    let a = capacity_until_fpr(&mut fuzzy, target, queries, step);
    let b = capacity_until_fpr(&mut flat, target, queries, step);
    Ok(a as f64 / b.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(pattern: &str) -> BitVector {
        let mut v = BitVector::new(pattern.len());
        for (i, c) in pattern.chars().enumerate() {
            if c == '1' {
                v.set(i);
            }
        }
        v
    }

    fn fill_until_fold(f: &mut FuzzyFoldedFilter, start: u64) -> u64 {
        let folds = f.fold_count();
        let mut i = start;
        while f.fold_count() == folds {
            f.insert(format!("e{i}").as_bytes()).unwrap();
            i += 1;
        }
        i
    }

    #[test]
    fn fold_pairs_positionwise() {
        let layer = FoldedLayer::fold(&bits("101"), &bits("011"), 0);
        let codes: Vec<_> = (0..3).map(|i| layer.code(i)).collect();
        assert_eq!(codes, vec![(true, false), (false, true), (true, true)]);
        let (a, b) = layer.unfold();
        assert_eq!((a, b), (bits("101"), bits("011")));
    }

    #[test]
    fn fold_is_not_commutative() {
        let (a, b) = (bits("1100"), bits("0110"));
        assert_ne!(FoldedLayer::fold(&a, &b, 0), FoldedLayer::fold(&b, &a, 0));
    }

    #[test]
    fn routing_first_then_second() {
        let mut f = FuzzyFoldedFilter::new(1024, 3, 1).unwrap();
        assert!(!f.contains(b"x"));
        f.insert(b"x").unwrap();
        assert!(f.active_first().contains(b"x"));
        assert_eq!(f.active_second().popcount(), 0);

        let mut i = 0;
        while f.active_first().fill_ratio() < 0.5 {
            f.insert(format!("a{i}").as_bytes()).unwrap();
            i += 1;
        }
        let before = f.active_first().clone();
        f.insert(b"next").unwrap();
        assert_eq!(f.active_first(), &before);
        assert!(f.active_second().contains(b"next"));
    }

    #[test]
    fn first_fold_halves_the_sub_filters() {
        let mut f = FuzzyFoldedFilter::new(1024, 3, 1).unwrap();
        assert_eq!(f.sub_size(), 512);
        fill_until_fold(&mut f, 0);
        assert_eq!(f.fold_count(), 1);
        assert_eq!(f.layers()[0].bucket_count(), 512);
        assert_eq!(f.sub_size(), 256);
    }

    #[test]
    fn fold_is_lossless_and_keeps_members() {
        let mut f = FuzzyFoldedFilter::new(1 << 14, 4, 9).unwrap();
        let answers = |f: &FuzzyFoldedFilter| -> Vec<bool> {
            (0..5000).map(|j| f.contains(format!("p{j}").as_bytes())).collect()
        };
        let mut members = Vec::new();
        for i in 0..4800u32 {
            let full = |b: &BloomFilter| b.fill_ratio() >= f.threshold();
            if full(f.active_first()) && full(f.active_second()) {
                let before = answers(&f);
                f.fold().unwrap();
                assert_eq!(answers(&f), before);
                assert!(members.iter().all(|e: &Vec<u8>| f.contains(e)));
            }
            let e = format!("m{i}").into_bytes();
            f.insert(&e).unwrap();
            members.push(e);
        }
        assert!(f.fold_count() >= 2);
        assert!(members.iter().all(|e| f.contains(e)));
    }

    #[test]
    fn query_order_and_probe_bound() {
        let mut f = FuzzyFoldedFilter::new(1 << 12, 4, 2).unwrap();
        let mut i = 0;
        while f.fold_count() < 2 {
            i = fill_until_fold(&mut f, i);
        }
        let mut negatives = 0;
        for j in 0..5000u32 {
            let q = format!("neg{j}");
            let mut trace = Vec::new();
            f.reset_probe_counter();
            let hit = f.contains_traced(q.as_bytes(), |s| trace.push(s));
            assert!(f.read_probe_counter() <= 4 * (2 + 2));
            if !hit {
                negatives += 1;
                assert_eq!(
                    trace,
                    vec![
                        QueryStage::ActiveSecond,
                        QueryStage::ActiveFirst,
                        QueryStage::Layer(1),
                        QueryStage::Layer(0)
                    ]
                );
            }
        }
        assert!(negatives > 0);
    }

    #[test]
    fn exhaustion_leaves_filter_unchanged() {
        let mut f = FuzzyFoldedFilter::new(64, 4, 0).unwrap();
        let mut i = 0u64;
        let err = loop {
            let before = f.clone();
            match f.insert(format!("e{i}").as_bytes()) {
                Ok(()) => i += 1,
                Err(e) => {
                    assert_eq!(f, before);
                    break e;
                }
            }
        };
        assert_eq!(err, InsertError::CapacityExhausted);
        assert_eq!(f.sub_size(), 4);
        assert!((0..i).all(|j| f.contains(format!("e{j}").as_bytes())));
    }

    #[test]
    fn self_comparison_ratio_is_one() {
        let mut a = BloomFilter::new(1 << 14, 5, 3).unwrap();
        let mut b = BloomFilter::new(1 << 14, 5, 3).unwrap();
        let x = capacity_until_fpr(&mut a, 0.02, 10_000, 8);
        let y = capacity_until_fpr(&mut b, 0.02, 10_000, 8);
        assert_eq!(x, y);
        assert!(x > 0);
    }

    #[test]
    fn predicted_capacity_reduces_to_bloom_without_folds() {
        // A threshold of 1 keeps everything in the first half; with h = 1 the
        // capacity at fill x over m/2 bits is -(m/2) ln(1 - x).
        let c = predicted_fold_capacity(1 << 16, 1, 1.0, 0.1);
        let expect = -((1 << 15) as f64) * (0.9f64).ln();
        assert!((c - expect).abs() < 1e-6 * expect);
    }

    #[test]
    fn benchmark_is_deterministic() {
        let a = capacity_ratio_benchmark(1 << 14, 4, 0.05, 7).unwrap();
        let b = capacity_ratio_benchmark(1 << 14, 4, 0.05, 7).unwrap();
        assert_eq!(a, b);
        assert!(a > 0.5);
    }
}
