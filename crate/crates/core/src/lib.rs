//! Probabilistic set-membership filters: standard, counting, blocked,
//! quotient, fuzzy-folded and cuckoo, with shared hashing and storage, a
//! versioned binary format, false positive rate analytics and a small
//! Bloom-filter De Bruijn graph assembler.
//!
//! ```
//! use pfilter::BloomFilter;
//!
//! let mut f = BloomFilter::new(1 << 16, 5, 42).unwrap();
//! f.insert(b"apple");
//! assert!(f.contains(b"apple"));
//! ```

pub mod analytics;
pub mod blocked;
pub mod bloom;
pub mod cli;
pub mod counting;
pub mod cuckoo;
pub mod debruijn;
pub mod envelope;
pub mod error;
pub mod filter;
pub mod fuzzyfold;
pub mod hash;
pub mod quotient;
pub mod storage;

pub use blocked::BlockedBloomFilter;
pub use bloom::BloomFilter;
pub use counting::CountingBloomFilter;
pub use cuckoo::{CuckooConfig, CuckooFilter};
pub use envelope::AnyFilter;
pub use error::{DecodeError, Error, InsertError, Result};
pub use filter::{FilterKind, MembershipFilter};
pub use fuzzyfold::{FoldedLayer, FuzzyFoldedFilter};
pub use hash::{hash_indices, make_fingerprint, Fingerprint, HashFamily};
pub use quotient::QuotientFilter;
pub use storage::{BitVector, CounterVector, PackedArray};
