//! Quotient filter.
//!
//! A `(q + r)`-bit fingerprint is split into a quotient (high `q` bits),
//! which names a canonical slot, and a remainder (low `r` bits), which is
//! stored. Collisions are resolved by linear probing. Three metadata bits per
//! slot make the runs recoverable:
//!
//! * `occupied`: some stored fingerprint has this slot as its quotient.
//! * `continuation`: the slot holds a remainder that is not the first of its run.
//! * `shifted`: the slot holds a remainder that is not in its canonical slot.
//!
//! Runs are kept sorted. Duplicate fingerprints are stored as separate
//! entries and `remove` deletes one of them.

use crate::error::{invalid, InsertError, Result};
use crate::filter::{FilterKind, MembershipFilter};
use crate::hash::make_fingerprint;
use crate::storage::{PackedArray, ProbeCounter, CACHE_LINE_BITS};

const OCCUPIED: u64 = 1;
const CONTINUATION: u64 = 1 << 1;
const SHIFTED: u64 = 1 << 2;
const FLAG_BITS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Slot {
    pub remainder: u64,
    pub occupied: bool,
    pub continuation: bool,
    pub shifted: bool,
}

impl Slot {
    fn decode(raw: u64) -> Self {
        Self {
            remainder: raw >> FLAG_BITS,
            occupied: raw & OCCUPIED != 0,
            continuation: raw & CONTINUATION != 0,
            shifted: raw & SHIFTED != 0,
        }
    }

    fn encode(self) -> u64 {
        (self.remainder << FLAG_BITS)
            | (self.occupied as u64)
            | ((self.continuation as u64) << 1)
            | ((self.shifted as u64) << 2)
    }

    pub fn is_empty(&self) -> bool {
        !self.occupied && !self.continuation && !self.shifted
    }
}

/// One decoded entry: logical quotient (may exceed the table size after
/// wrapping) and remainder.
type Entry = (u64, u64);

#[derive(Debug, Clone)]
pub struct QuotientFilter {
    q: u8,
    r: u8,
    seed: u64,
    slots: PackedArray,
    live: u64,
    probes: ProbeCounter,
}

impl QuotientFilter {
    /// `2^q` slots holding `r`-bit remainders. Requires `q, r >= 1`,
    /// `q <= 30` and `4 <= q + r <= 32`.
    pub fn new(q: u8, r: u8, seed: u64) -> Result<Self> {
        if q == 0 || r == 0 || q > 30 {
            return Err(invalid(format!("quotient/remainder widths q={q}, r={r} out of range")));
        }
        if !(4..=32).contains(&(q + r)) {
            return Err(invalid(format!("fingerprint width q+r = {} outside [4, 32]", q + r)));
        }
        let slots = PackedArray::new(1 << q, r as u32 + FLAG_BITS);
        Ok(Self::from_slots(q, r, seed, slots, 0))
    }

    fn from_slots(q: u8, r: u8, seed: u64, slots: PackedArray, live: u64) -> Self {
        let probes = ProbeCounter::new(slots.storage_bits(), CACHE_LINE_BITS);
        Self {
            q,
            r,
            seed,
            slots,
            live,
            probes,
        }
    }

    pub(crate) fn from_parts(q: u8, r: u8, seed: u64, words: Vec<u64>, live: u64) -> Option<Self> {
        Self::new(q, r, seed).ok()?;
        let slots = PackedArray::from_words(1 << q, r as u32 + FLAG_BITS, words)?;
        let f = Self::from_slots(q, r, seed, slots, live);
        (f.fingerprints().len() as u64 == live).then_some(f)
    }

    pub fn quotient_bits(&self) -> u8 {
        self.q
    }

    pub fn remainder_bits(&self) -> u8 {
        self.r
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn capacity(&self) -> u64 {
        1 << self.q
    }

    pub fn live_count(&self) -> u64 {
        self.live
    }

    /// Fraction of slots in use.
    pub fn load(&self) -> f64 {
        self.live as f64 / self.capacity() as f64
    }

    pub fn slot_words(&self) -> &[u64] {
        self.slots.words()
    }

    /// Storage per live element, in bits.
    pub fn bits_per_element(&self) -> f64 {
        self.slots.storage_bits() as f64 / self.live.max(1) as f64
    }

    /// The `(q + r)`-bit fingerprint of `element`.
    pub fn fingerprint_of(&self, element: &[u8]) -> u64 {
        make_fingerprint(element, self.q + self.r, self.seed)
            .expect("width validated at construction")
            .value() as u64
    }

    fn split(&self, fp: u64) -> (usize, u64) {
        let rmask = (1u64 << self.r) - 1;
        (((fp >> self.r) & (self.capacity() - 1)) as usize, fp & rmask)
    }

    fn size(&self) -> usize {
        1 << self.q
    }

    fn slot(&self, i: usize) -> Slot {
        let w = self.slots.width() as usize;
        self.probes.touch_span(i * w, w);
        Slot::decode(self.slots.get(i))
    }

    pub fn slot_at(&self, i: usize) -> Slot {
        Slot::decode(self.slots.get(i % self.size()))
    }

    fn write(&mut self, i: usize, s: Slot) {
        self.slots.set(i, s.encode());
    }

    fn set_occupied(&mut self, i: usize, value: bool) {
        let mut s = Slot::decode(self.slots.get(i));
        s.occupied = value;
        self.write(i, s);
    }

    /// Walks back from a non-empty slot to the start of its cluster.
    fn cluster_start(&self, mut i: usize) -> usize {
        let mask = self.size() - 1;
        for _ in 0..self.size() {
            if !self.slot(i).shifted {
                return i;
            }
            i = (i + mask) & mask;
        }
        i
    }

    /// Decodes entries from cluster start `s` up to the first empty slot, or
    /// until the run of logical quotient `stop_after` has been passed.
    /// Returns the entries and the number of slots scanned.
    fn scan(&self, s: usize, stop_after: Option<u64>) -> (Vec<Entry>, usize) {
        let size = self.size();
        let mask = size - 1;
        let mut entries = Vec::new();
        let mut bucket = s as u64;
        let mut scanned = 0;
        while scanned < size {
            let slot = self.slot((s + scanned) & mask);
            if slot.is_empty() {
                break;
            }
            if scanned > 0 && !slot.continuation {
                bucket += 1;
                while !self.slot(bucket as usize & mask).occupied {
                    bucket += 1;
                }
                if stop_after.is_some_and(|q| bucket > q) {
                    break;
                }
            }
            entries.push((bucket, slot.remainder));
            scanned += 1;
        }
        (entries, scanned)
    }

    fn logical(&self, q: usize, s: usize) -> u64 {
        if q >= s {
            q as u64
        } else {
            (q + self.size()) as u64
        }
    }

    /// Lays `entries` (sorted) out from cluster start `s`, clearing the
    /// `old_len` slots previously used. Occupied flags are left untouched.
    fn relayout(&mut self, s: usize, entries: &[Entry], old_len: usize) {
        let mask = self.size() - 1;
        for k in 0..old_len.max(entries.len()) {
            let i = (s + k) & mask;
            let occupied = Slot::decode(self.slots.get(i)).occupied;
            self.write(
                i,
                Slot {
                    occupied,
                    ..Slot::default()
                },
            );
        }
        let mut pos = s as u64;
        let mut prev: Option<u64> = None;
        for &(q, rem) in entries {
            let continuation = prev == Some(q);
            if !continuation {
                pos = pos.max(q);
            }
            let i = pos as usize & mask;
            let occupied = Slot::decode(self.slots.get(i)).occupied;
            self.write(
                i,
                Slot {
                    remainder: rem,
                    occupied,
                    continuation,
                    shifted: pos != q,
                },
            );
            pos += 1;
            prev = Some(q);
        }
    }

    /// Inserts a raw fingerprint. Returns false, leaving the filter
    /// unchanged, when every slot is in use.
    pub fn insert_fingerprint(&mut self, fp: u64) -> bool {
        if self.live == self.capacity() {
            return false;
        }
        let (q, rem) = self.split(fp);
        let home = self.slot(q);
        if home.is_empty() {
            self.write(
                q,
                Slot {
                    remainder: rem,
                    occupied: true,
                    continuation: false,
                    shifted: false,
                },
            );
        } else {
            let s = self.cluster_start(q);
            let (mut entries, old_len) = self.scan(s, None);
            let key = (self.logical(q, s), rem);
            let at = entries.partition_point(|e| *e <= key);
            entries.insert(at, key);
            self.set_occupied(q, true);
            self.relayout(s, &entries, old_len);
        }
        self.live += 1;
        true
    }

    pub fn contains_fingerprint(&self, fp: u64) -> bool {
        let (q, rem) = self.split(fp);
        if !self.slot(q).occupied {
            return false;
        }
        let s = self.cluster_start(q);
        let lq = self.logical(q, s);
        let (entries, _) = self.scan(s, Some(lq));
        entries.iter().any(|&(eq, er)| eq == lq && er == rem)
    }

    pub fn remove_fingerprint(&mut self, fp: u64) -> bool {
        let (q, rem) = self.split(fp);
        if !self.slot(q).occupied {
            return false;
        }
        let s = self.cluster_start(q);
        let (mut entries, old_len) = self.scan(s, None);
        let lq = self.logical(q, s);
        let Some(at) = entries.iter().position(|&e| e == (lq, rem)) else {
            return false;
        };
        entries.remove(at);
        if !entries.iter().any(|&(eq, _)| eq == lq) {
            self.set_occupied(q, false);
        }
        self.relayout(s, &entries, old_len);
        self.live -= 1;
        true
    }

    /// Returns false without mutation when the filter is full.
    pub fn insert(&mut self, element: &[u8]) -> bool {
        self.insert_fingerprint(self.fingerprint_of(element))
    }

    pub fn contains(&self, element: &[u8]) -> bool {
        self.contains_fingerprint(self.fingerprint_of(element))
    }

    /// Deletes one stored copy of the element's fingerprint, if present.
    pub fn remove(&mut self, element: &[u8]) -> bool {
        self.remove_fingerprint(self.fingerprint_of(element))
    }

    /// Slots a lookup for `fp` scans: from its cluster start through its run.
    pub fn lookup_scan_len(&self, fp: u64) -> usize {
        let (q, _) = self.split(fp);
        if !self.slot_at(q).occupied {
            return 1;
        }
        let s = self.cluster_start(q);
        let lq = self.logical(q, s);
        let back = (lq - s as u64) as usize;
        let (_, scanned) = self.scan(s, Some(lq));
        back.max(scanned) + 1
    }

    /// Every stored fingerprint, decoded from the slots, in no particular order.
    pub fn fingerprints(&self) -> Vec<u64> {
        let size = self.size();
        let mask = size - 1;
        let empty = |i: usize| Slot::decode(self.slots.get(i & mask)).is_empty();
        // Each maximal run of non-empty slots begins right after an empty slot.
        let mut starts: Vec<usize> = (0..size)
            .filter(|&i| !empty(i) && empty(i + mask))
            .collect();
        if starts.is_empty() && !empty(0) {
            starts.extend((0..size).find(|&i| !Slot::decode(self.slots.get(i)).shifted));
        }
        starts
            .into_iter()
            .flat_map(|s| self.scan(s, None).0)
            .map(|(q, rem)| (((q as usize & mask) as u64) << self.r) | rem)
            .collect()
    }

    /// Lengths of maximal runs of non-empty slots.
    pub fn cluster_lengths(&self) -> Vec<usize> {
        let size = self.size();
        let Some(empty) = (0..size).find(|&i| Slot::decode(self.slots.get(i)).is_empty()) else {
            return vec![size];
        };
        let mut out = Vec::new();
        let mut current = 0;
        for k in 1..=size {
            if Slot::decode(self.slots.get((empty + k) % size)).is_empty() {
                if current > 0 {
                    out.push(current);
                }
                current = 0;
            } else {
                current += 1;
            }
        }
        out
    }
}

impl PartialEq for QuotientFilter {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
            && self.r == other.r
            && self.seed == other.seed
            && self.live == other.live
            && self.slots == other.slots
    }
}

impl MembershipFilter for QuotientFilter {
    fn kind(&self) -> FilterKind {
        FilterKind::Quotient
    }

    fn try_insert(&mut self, element: &[u8]) -> Result<(), InsertError> {
        if self.insert(element) {
            Ok(())
        } else {
            Err(InsertError::Full)
        }
    }

    fn contains(&self, element: &[u8]) -> bool {
        QuotientFilter::contains(self, element)
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
