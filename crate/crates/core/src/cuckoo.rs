//! Cuckoo filter with partial-key cuckoo hashing.
//!
//! Each element stores a fingerprint in one of two buckets. The alternate
//! bucket is computed from the current bucket and the fingerprint alone,
//! `alt = i XOR offset(fp)`, so a displaced fingerprint can be relocated
//! without the original element. The offset is never zero, which keeps the
//! two buckets distinct whenever the table has more than one bucket.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, InsertError, Result};
use crate::filter::{FilterKind, MembershipFilter};
use crate::hash::{base_hash, make_fingerprint, ALT_BUCKET_SALT, BUCKET_SALT};
use crate::storage::{PackedArray, ProbeCounter};

pub const DEFAULT_SLOTS_PER_BUCKET: u8 = 4;
pub const DEFAULT_FINGERPRINT_BITS: u8 = 16;
pub const DEFAULT_MAX_KICKS: u32 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CuckooConfig {
    /// log2 of the bucket count.
    pub bucket_bits: u8,
    pub slots_per_bucket: u8,
    pub fingerprint_bits: u8,
    pub max_kicks: u32,
    pub seed: u64,
}

impl CuckooConfig {
    /// `2^bucket_bits` buckets with the default bucket size, fingerprint width and kick budget.
    pub fn new(bucket_bits: u8, seed: u64) -> Self {
        Self {
            bucket_bits,
            slots_per_bucket: DEFAULT_SLOTS_PER_BUCKET,
            fingerprint_bits: DEFAULT_FINGERPRINT_BITS,
            max_kicks: DEFAULT_MAX_KICKS,
            seed,
        }
    }

    pub fn slots_per_bucket(mut self, b: u8) -> Self {
        self.slots_per_bucket = b;
        self
    }

    pub fn fingerprint_bits(mut self, w: u8) -> Self {
        self.fingerprint_bits = w;
        self
    }

    pub fn max_kicks(mut self, k: u32) -> Self {
        self.max_kicks = k;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.bucket_bits > 32 {
            return Err(invalid(format!("2^{} buckets is too many", self.bucket_bits)));
        }
        if self.slots_per_bucket == 0 {
            return Err(invalid("buckets need at least one slot"));
        }
        if !(4..=32).contains(&self.fingerprint_bits) {
            return Err(invalid(format!(
                "fingerprint width {} outside [4, 32]",
                self.fingerprint_bits
            )));
        }
        if self.max_kicks == 0 {
            return Err(invalid("max_kicks must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CuckooFilter {
    config: CuckooConfig,
    slots: PackedArray,
    live: u64,
    rng: ChaCha8Rng,
    probes: ProbeCounter,
    total_kicks: u64,
    last_kicks: u32,
}

impl CuckooFilter {
    pub fn new(config: CuckooConfig) -> Result<Self> {
        config.validate()?;
        let slots = PackedArray::new(
            (1usize << config.bucket_bits) * config.slots_per_bucket as usize,
            config.fingerprint_bits as u32,
        );
        Ok(Self::from_slots(config, slots, 0))
    }

    fn from_slots(config: CuckooConfig, slots: PackedArray, live: u64) -> Self {
        let bucket_width = config.slots_per_bucket as usize * config.fingerprint_bits as usize;
        Self {
            probes: ProbeCounter::new(slots.storage_bits(), bucket_width),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            slots,
            live,
            total_kicks: 0,
            last_kicks: 0,
        }
    }

    pub(crate) fn from_parts(config: CuckooConfig, words: Vec<u64>, live: u64) -> Option<Self> {
        config.validate().ok()?;
        let slots = PackedArray::from_words(
            (1usize << config.bucket_bits) * config.slots_per_bucket as usize,
            config.fingerprint_bits as u32,
            words,
        )?;
        let stored = (0..slots.len()).filter(|&i| slots.get(i) != 0).count() as u64;
        (stored == live).then(|| Self::from_slots(config, slots, live))
    }

    pub fn config(&self) -> &CuckooConfig {
        &self.config
    }

    pub fn bucket_count(&self) -> usize {
        1 << self.config.bucket_bits
    }

    fn b(&self) -> usize {
        self.config.slots_per_bucket as usize
    }

    fn mask(&self) -> usize {
        self.bucket_count() - 1
    }

    pub fn fingerprint(&self, element: &[u8]) -> u32 {
        make_fingerprint(element, self.config.fingerprint_bits, self.config.seed)
            .expect("width validated at construction")
            .value()
    }

    /// The primary bucket of `element`.
    pub fn primary_bucket(&self, element: &[u8]) -> usize {
        base_hash(element, self.config.seed ^ BUCKET_SALT) as usize & self.mask()
    }

    /// The other admissible bucket for `fp` when it sits in `bucket`.
    pub fn alt_bucket(&self, bucket: usize, fp: u32) -> usize {
        let mut offset =
            base_hash(&fp.to_le_bytes(), self.config.seed ^ ALT_BUCKET_SALT) as usize & self.mask();
        if offset == 0 && self.mask() != 0 {
            offset = 1;
        }
        bucket ^ offset
    }

    fn slot(&self, bucket: usize, k: usize) -> u32 {
        self.slots.get(bucket * self.b() + k) as u32
    }

    fn set_slot(&mut self, bucket: usize, k: usize, fp: u32) {
        let i = bucket * self.b() + k;
        self.slots.set(i, fp as u64);
    }

    fn touch_bucket(&self, bucket: usize) {
        self.probes
            .touch(bucket * self.b() * self.config.fingerprint_bits as usize);
    }

    fn bucket_has(&self, bucket: usize, fp: u32) -> bool {
        self.touch_bucket(bucket);
        (0..self.b()).any(|k| self.slot(bucket, k) == fp)
    }

    fn count_in(&self, bucket: usize, fp: u32) -> usize {
        (0..self.b()).filter(|&k| self.slot(bucket, k) == fp).count()
    }

    fn place(&mut self, bucket: usize, fp: u32) -> bool {
        match (0..self.b()).find(|&k| self.slot(bucket, k) == 0) {
            Some(k) => {
                self.set_slot(bucket, k, fp);
                true
            }
            None => false,
        }
    }

    /// Inserts `element`, displacing resident fingerprints if both buckets are
    /// full. On failure every displacement is undone and the filter is
    /// exactly as before.
    pub fn try_insert(&mut self, element: &[u8]) -> Result<(), InsertError> {
        self.last_kicks = 0;
        let fp = self.fingerprint(element);
        let i1 = self.primary_bucket(element);
        let i2 = self.alt_bucket(i1, fp);
        let copies = self.count_in(i1, fp) + if i2 != i1 { self.count_in(i2, fp) } else { 0 };
        if copies >= 2 * self.b() {
            return Err(InsertError::DuplicateBound);
        }
        if self.place(i1, fp) || self.place(i2, fp) {
            self.live += 1;
            return Ok(());
        }

        let mut undo: Vec<(usize, usize, u32)> = Vec::new();
        let mut bucket = if self.rng.gen::<bool>() { i1 } else { i2 };
        let mut carried = fp;
        for kick in 1..=self.config.max_kicks {
            let k = self.rng.gen_range(0..self.b());
            let victim = self.slot(bucket, k);
            undo.push((bucket, k, victim));
            self.set_slot(bucket, k, carried);
            carried = victim;
            bucket = self.alt_bucket(bucket, carried);
            if self.place(bucket, carried) {
                self.live += 1;
                self.last_kicks = kick;
                self.total_kicks += kick as u64;
                return Ok(());
            }
        }
        for (bucket, k, fp) in undo.into_iter().rev() {
            self.set_slot(bucket, k, fp);
        }
        self.last_kicks = self.config.max_kicks;
        Err(InsertError::Full)
    }

    /// False when the table is full or the duplicate bound is reached.
    pub fn insert(&mut self, element: &[u8]) -> bool {
        self.try_insert(element).is_ok()
    }

    pub fn contains(&self, element: &[u8]) -> bool {
        let fp = self.fingerprint(element);
        let i1 = self.primary_bucket(element);
        self.bucket_has(i1, fp) || self.bucket_has(self.alt_bucket(i1, fp), fp)
    }

    /// Deletes one copy of the element's fingerprint from either bucket.
    ///
    /// Only remove elements that were inserted: removing a non-member whose
    /// fingerprint collides with a member deletes the member's copy.
    pub fn remove(&mut self, element: &[u8]) -> bool {
        let fp = self.fingerprint(element);
        let i1 = self.primary_bucket(element);
        let i2 = self.alt_bucket(i1, fp);
        for bucket in [i1, i2] {
            self.touch_bucket(bucket);
            if let Some(k) = (0..self.b()).find(|&k| self.slot(bucket, k) == fp) {
                self.set_slot(bucket, k, 0);
                self.live -= 1;
                return true;
            }
        }
        false
    }

    pub fn live_count(&self) -> u64 {
        self.live
    }

    pub fn capacity(&self) -> u64 {
        (self.bucket_count() * self.b()) as u64
    }

    pub fn load_factor(&self) -> f64 {
        self.live as f64 / self.capacity() as f64
    }

    /// Displacements performed by the most recent insert.
    pub fn last_kicks(&self) -> u32 {
        self.last_kicks
    }

    /// Displacements over all successful inserts.
    pub fn total_kicks(&self) -> u64 {
        self.total_kicks
    }

    pub fn slot_words(&self) -> &[u64] {
        self.slots.words()
    }

    pub fn bits_per_element(&self) -> f64 {
        self.slots.storage_bits() as f64 / self.live.max(1) as f64
    }

    /// `(bucket, fingerprint)` for every occupied slot.
    pub fn stored(&self) -> Vec<(usize, u32)> {
        (0..self.bucket_count())
            .flat_map(|bucket| (0..self.b()).map(move |k| (bucket, k)))
            .filter_map(|(bucket, k)| {
                let fp = self.slot(bucket, k);
                (fp != 0).then_some((bucket, fp))
            })
            .collect()
    }
}

impl PartialEq for CuckooFilter {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.live == other.live && self.slots == other.slots
    }
}

impl MembershipFilter for CuckooFilter {
    fn kind(&self) -> FilterKind {
        FilterKind::Cuckoo
    }

    fn try_insert(&mut self, element: &[u8]) -> Result<(), InsertError> {
        CuckooFilter::try_insert(self, element)
    }

    fn contains(&self, element: &[u8]) -> bool {
        CuckooFilter::contains(self, element)
    }

    fn len(&self) -> u64 {
        self.live
    }

    fn storage_bits(&self) -> u64 {
        self.slots.storage_bits() as u64
    }

    fn reset_probe_counter(&self) {
        self.probes.reset();
    }

    fn read_probe_counter(&self) -> u64 {
        self.probes.read()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn config_validation() {
        assert!(CuckooFilter::new(CuckooConfig::new(4, 0).slots_per_bucket(0)).is_err());
        assert!(CuckooFilter::new(CuckooConfig::new(4, 0).fingerprint_bits(3)).is_err());
        assert!(CuckooFilter::new(CuckooConfig::new(4, 0).max_kicks(0)).is_err());
    }

    #[test]
    fn first_insert_lands_in_primary_bucket() {
        let mut f = CuckooFilter::new(CuckooConfig::new(8, 1)).unwrap();
        assert!(!f.contains(b"x"));
        assert!(f.insert(b"x"));
        let fp = f.fingerprint(b"x");
        assert_eq!(f.stored(), vec![(f.primary_bucket(b"x"), fp)]);
        assert!(f.contains(b"x"));
    }

    #[test]
    fn duplicate_bound_is_two_buckets_worth() {
        let mut f = CuckooFilter::new(CuckooConfig::new(8, 1)).unwrap();
        for _ in 0..8 {
            assert!(f.insert(b"same"));
        }
        assert_eq!(f.try_insert(b"same"), Err(InsertError::DuplicateBound));
        assert_eq!(f.live_count(), 8);
    }

    #[test]
    fn shared_bucket_pair_terminates_via_kick_budget() {
        // Two buckets of one slot: every element shares the same pair.
        let mut f = CuckooFilter::new(
            CuckooConfig::new(1, 3).slots_per_bucket(1).max_kicks(50),
        )
        .unwrap();
        let elems: Vec<Vec<u8>> = (0u32..)
            .map(|i| format!("e{i}").into_bytes())
            .scan(std::collections::HashSet::new(), |seen, e| {
                Some((seen.insert(f.fingerprint(&e)), e))
            })
            .filter_map(|(fresh, e)| fresh.then_some(e))
            .take(3)
            .collect();
        assert!(f.insert(&elems[0]));
        assert!(f.insert(&elems[1]));
        let before = f.clone();
        assert_eq!(f.try_insert(&elems[2]), Err(InsertError::Full));
        assert_eq!(f, before);
        assert!(f.contains(&elems[0]) && f.contains(&elems[1]));
    }

    #[test]
    fn alt_bucket_is_an_involution() {
        let f = CuckooFilter::new(CuckooConfig::new(10, 5)).unwrap();
        for i in 0..5000u32 {
            let e = i.to_le_bytes();
            let fp = f.fingerprint(&e);
            let i1 = f.primary_bucket(&e);
            let i2 = f.alt_bucket(i1, fp);
            assert_ne!(i1, i2);
            assert_eq!(f.alt_bucket(i2, fp), i1);
        }
    }

    #[test]
    fn remove_semantics() {
        let mut f = CuckooFilter::new(CuckooConfig::new(8, 1)).unwrap();
        assert!(!f.remove(b"x"));
        f.insert(b"x");
        assert!(f.remove(b"x"));
        assert!(!f.contains(b"x"));
        assert_eq!(f.load_factor(), 0.0);
    }

    #[test]
    fn lookups_touch_at_most_two_buckets() {
        let mut f = CuckooFilter::new(CuckooConfig::new(12, 2)).unwrap();
        for i in 0..14_000u32 {
            f.insert(&i.to_le_bytes());
        }
        for i in 0..20_000u32 {
            f.reset_probe_counter();
            f.contains(format!("q{i}").as_bytes());
            assert!(f.read_probe_counter() <= 2);
        }
    }

    #[test]
    fn single_slot_buckets_fail_earlier() {
        let first_failure = |b: u8, bits: u8| {
            let mut f = CuckooFilter::new(CuckooConfig::new(bits, 11).slots_per_bucket(b)).unwrap();
            let mut i = 0u64;
            while f.insert(format!("e{i}").as_bytes()) {
                i += 1;
            }
            f.load_factor()
        };
        let one = first_failure(1, 14);
        let four = first_failure(4, 12);
        assert!(one + 0.2 < four, "b=1 {one}, b=4 {four}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn no_false_negatives_with_displacements(seed: u64, n in 100usize..900) {
            let mut f = CuckooFilter::new(CuckooConfig::new(8, seed)).unwrap();
            let mut live = Vec::new();
            for i in 0..n {
                let e = format!("{seed}:{i}").into_bytes();
                if f.insert(&e) {
                    live.push(e);
                }
                if i % 3 == 0 && !live.is_empty() {
                    let e = live.swap_remove(i % live.len());
                    prop_assert!(f.remove(&e));
                }
            }
            for e in &live {
                prop_assert!(f.contains(e));
            }
            prop_assert_eq!(f.live_count() as usize, live.len());
        }
    }
}
