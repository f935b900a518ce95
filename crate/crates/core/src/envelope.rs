//! Binary filter format and a kind-erased filter wrapper.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "PFLT" | version u8 = 1 | kind u8 | m u64 | h u32 | seed u64 | kind fields | payload words (u64)
//! ```
//!
//! Kind fields:
//!
//! | kind      | fields                                                        |
//! |-----------|---------------------------------------------------------------|
//! | bloom     | inserted u64                                                  |
//! | counting  | counter_width u8, live u64                                    |
//! | blocked   | block_bits u32, inserted u64                                  |
//! | quotient  | q u8, r u8, live u64                                          |
//! | fuzzyfold | threshold f64, f u32, f × layer length u64, inserted u64, first/second inserted u64 |
//! | cuckoo    | p u8, b u8, fingerprint_width u8, max_kicks u32, live u64     |
//!
//! For quotient and cuckoo filters `m` is the slot count and `h` is 0.

use crate::blocked::BlockedBloomFilter;
use crate::bloom::BloomFilter;
use crate::counting::CountingBloomFilter;
use crate::cuckoo::{CuckooConfig, CuckooFilter};
use crate::error::{DecodeError, Error, InsertError, Result};
use crate::filter::{FilterKind, MembershipFilter};
use crate::fuzzyfold::{FoldedLayer, FuzzyFoldedFilter};
use crate::hash::HashFamily;
use crate::quotient::QuotientFilter;
use crate::storage::{BitVector, CounterVector, PackedArray};

pub const MAGIC: &[u8; 4] = b"PFLT";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum AnyFilter {
    Bloom(BloomFilter),
    Counting(CountingBloomFilter),
    Blocked(BlockedBloomFilter),
    Quotient(QuotientFilter),
    FuzzyFolded(FuzzyFoldedFilter),
    Cuckoo(CuckooFilter),
}

macro_rules! dispatch {
    ($self:expr, $f:ident => $body:expr) => {
        match $self {
            AnyFilter::Bloom($f) => $body,
            AnyFilter::Counting($f) => $body,
            AnyFilter::Blocked($f) => $body,
            AnyFilter::Quotient($f) => $body,
            AnyFilter::FuzzyFolded($f) => $body,
            AnyFilter::Cuckoo($f) => $body,
        }
    };
}

impl AnyFilter {
    /// Removes one copy of `element`. Kinds without removal return
    /// [`Error::Unsupported`].
    pub fn remove(&mut self, element: &[u8]) -> Result<bool> {
        match self {
            AnyFilter::Counting(f) => Ok(f.remove(element)),
            AnyFilter::Quotient(f) => Ok(f.remove(element)),
            AnyFilter::Cuckoo(f) => Ok(f.remove(element)),
            other => Err(Error::Unsupported(other.kind().name())),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(MAGIC);
        w.u8(VERSION);
        w.u8(self.kind().byte());
        match self {
            AnyFilter::Bloom(f) => {
                w.header(f.bit_len(), f.hash_count(), f.seed());
                w.u64(f.inserted());
                w.words(f.bits().words());
            }
            AnyFilter::Counting(f) => {
                w.header(f.family().range(), f.family().hash_count(), f.family().seed());
                w.u8(f.counter_width() as u8);
                w.u64(f.len());
                w.words(f.counters().cells().words());
            }
            AnyFilter::Blocked(f) => {
                w.header(f.bit_len(), f.hash_count(), f.seed());
                w.u32(f.block_bits());
                w.u64(f.inserted());
                w.words(f.bits().words());
            }
            AnyFilter::Quotient(f) => {
                w.header(f.capacity(), 0, f.seed());
                w.u8(f.quotient_bits());
                w.u8(f.remainder_bits());
                w.u64(f.live_count());
                w.words(f.slot_words());
            }
            AnyFilter::FuzzyFolded(f) => {
                w.header(f.budget_bits(), f.hash_count(), f.seed());
                w.f64(f.threshold());
                w.u32(f.fold_count());
                for l in f.layers() {
                    w.u64(l.bucket_count() as u64);
                }
                w.u64(f.inserted());
                w.u64(f.active_first().inserted());
                w.u64(f.active_second().inserted());
                for l in f.layers() {
                    w.words(l.words());
                }
                w.words(f.active_first().bits().words());
                w.words(f.active_second().bits().words());
            }
            AnyFilter::Cuckoo(f) => {
                let c = f.config();
                w.header(f.bucket_count() as u64, 0, c.seed);
                w.u8(c.bucket_bits);
                w.u8(c.slots_per_bucket);
                w.u8(c.fingerprint_bits);
                w.u32(c.max_kicks);
                w.u64(f.live_count());
                w.words(f.slot_words());
            }
        }
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(DecodeError::BadMagic);
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(DecodeError::UnsupportedVersion(version));
        }
        let kind = FilterKind::try_from(r.u8()?)?;
        let (m, h, seed) = (r.u64()?, r.u32()?, r.u64()?);
        let bad = |what: &str| DecodeError::Invalid(format!("{what} in {kind} filter"));
        let filter = match kind {
            FilterKind::Bloom => {
                let inserted = r.u64()?;
                let family = HashFamily::new(seed, h, m).map_err(|_| bad("parameters"))?;
                BloomFilter::new(m, h, seed).map_err(|_| bad("parameters"))?;
                let bits = BitVector::from_words(m as usize, r.words(bit_words(m, 1)?)?)
                    .ok_or_else(|| bad("bit array"))?;
                AnyFilter::Bloom(BloomFilter::from_parts(family, bits, inserted))
            }
            FilterKind::Counting => {
                let width = r.u8()? as u32;
                let live = r.u64()?;
                CountingBloomFilter::with_counter_width(m, h, seed, width)
                    .map_err(|_| bad("parameters"))?;
                let family = HashFamily::new(seed, h, m).map_err(|_| bad("parameters"))?;
                let cells = PackedArray::from_words(m as usize, width, r.words(bit_words(m, width)?)?)
                    .ok_or_else(|| bad("counter array"))?;
                AnyFilter::Counting(CountingBloomFilter::from_parts(
                    family,
                    CounterVector::from_cells(cells),
                    live,
                ))
            }
            FilterKind::Blocked => {
                let block_bits = r.u32()?;
                let inserted = r.u64()?;
                let words = r.words(bit_words(m, 1)?)?;
                AnyFilter::Blocked(
                    BlockedBloomFilter::from_parts(seed, h, block_bits, words, m, inserted)
                        .ok_or_else(|| bad("parameters"))?,
                )
            }
            FilterKind::Quotient => {
                let (q, rb, live) = (r.u8()?, r.u8()?, r.u64()?);
                if q > 30 || m != 1 << q {
                    return Err(bad("slot count"));
                }
                let words = r.words(bit_words(m, rb as u32 + 3)?)?;
                AnyFilter::Quotient(
                    QuotientFilter::from_parts(q, rb, seed, words, live)
                        .ok_or_else(|| bad("slot array"))?,
                )
            }
            FilterKind::FuzzyFolded => {
                let threshold = r.f64()?;
                let folds = r.u32()?;
                if folds > 64 {
                    return Err(bad("fold count"));
                }
                let lengths = (0..folds).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
                let (inserted, n_first, n_second) = (r.u64()?, r.u64()?, r.u64()?);
                let mut layers = Vec::with_capacity(lengths.len());
                for (g, &len) in lengths.iter().enumerate() {
                    let words = r.words(bit_words(len, 2)?)?;
                    layers.push(
                        FoldedLayer::from_words(len as usize, g as u32, words)
                            .ok_or_else(|| bad("layer"))?,
                    );
                }
                let sub = (m / 2) >> folds.min(63);
                let first = r.words(bit_words(sub, 1)?)?;
                let second = r.words(bit_words(sub, 1)?)?;
                AnyFilter::FuzzyFolded(
                    FuzzyFoldedFilter::from_parts(
                        m,
                        h,
                        seed,
                        threshold,
                        layers,
                        [(first, n_first), (second, n_second)],
                        inserted,
                    )
                    .ok_or_else(|| bad("parameters"))?,
                )
            }
            FilterKind::Cuckoo => {
                let config = CuckooConfig {
                    bucket_bits: r.u8()?,
                    slots_per_bucket: r.u8()?,
                    fingerprint_bits: r.u8()?,
                    max_kicks: r.u32()?,
                    seed,
                };
                let live = r.u64()?;
                if config.bucket_bits > 32 || m != 1 << config.bucket_bits {
                    return Err(bad("bucket count"));
                }
                let slots = m
                    .checked_mul(config.slots_per_bucket as u64)
                    .ok_or_else(|| bad("slot count"))?;
                let words = r.words(bit_words(slots, config.fingerprint_bits as u32)?)?;
                AnyFilter::Cuckoo(
                    CuckooFilter::from_parts(config, words, live).ok_or_else(|| bad("slot array"))?,
                )
            }
        };
        if r.pos != bytes.len() {
            return Err(DecodeError::TrailingBytes(bytes.len() - r.pos));
        }
        Ok(filter)
    }
}

impl MembershipFilter for AnyFilter {
    fn kind(&self) -> FilterKind {
        dispatch!(self, f => f.kind())
    }

    fn try_insert(&mut self, element: &[u8]) -> Result<(), InsertError> {
        dispatch!(self, f => MembershipFilter::try_insert(f, element))
    }

    fn contains(&self, element: &[u8]) -> bool {
        dispatch!(self, f => MembershipFilter::contains(f, element))
    }

    fn len(&self) -> u64 {
        dispatch!(self, f => f.len())
    }

    fn storage_bits(&self) -> u64 {
        dispatch!(self, f => MembershipFilter::storage_bits(f))
    }

    fn reset_probe_counter(&self) {
        dispatch!(self, f => f.reset_probe_counter())
    }

    fn read_probe_counter(&self) -> u64 {
        dispatch!(self, f => f.read_probe_counter())
    }
}

macro_rules! from_filter {
    ($($variant:ident($ty:ty)),*) => {$(
        impl From<$ty> for AnyFilter {
            fn from(f: $ty) -> Self {
                AnyFilter::$variant(f)
            }
        }
    )*};
}

from_filter!(
    Bloom(BloomFilter),
    Counting(CountingBloomFilter),
    Blocked(BlockedBloomFilter),
    Quotient(QuotientFilter),
    FuzzyFolded(FuzzyFoldedFilter),
    Cuckoo(CuckooFilter)
);

/// Number of u64 words holding `len` fields of `width` bits.
fn bit_words(len: u64, width: u32) -> Result<usize, DecodeError> {
    len.checked_mul(width as u64)
        .map(|b| b.div_ceil(64) as usize)
        .ok_or_else(|| DecodeError::Invalid(format!("array of {len} × {width} bits")))
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.0.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }
    fn header(&mut self, m: u64, h: u32, seed: u64) {
        self.u64(m);
        self.u32(h);
        self.u64(seed);
    }
    fn words(&mut self, ws: &[u64]) {
        for &w in ws {
            self.u64(w);
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        let available = self.bytes.len() - self.pos;
        if n > available {
            return Err(DecodeError::Truncated { needed: n, available });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, DecodeError> {
        self.array().map(u32::from_le_bytes)
    }
    fn u64(&mut self) -> Result<u64, DecodeError> {
        self.array().map(u64::from_le_bytes)
    }
    fn f64(&mut self) -> Result<f64, DecodeError> {
        self.array().map(f64::from_le_bytes)
    }
    fn words(&mut self, n: usize) -> Result<Vec<u64>, DecodeError> {
        let raw = self.take(n.checked_mul(8).ok_or(DecodeError::Truncated {
            needed: usize::MAX,
            available: self.bytes.len() - self.pos,
        })?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }
}
