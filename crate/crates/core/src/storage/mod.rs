//! Backing stores shared by the array-based filters.

mod bitvec;
mod counters;
mod packed;
mod probe;

pub use bitvec::BitVector;
pub use counters::CounterVector;
pub use packed::PackedArray;
pub use probe::{ProbeCounter, CACHE_LINE_BITS};
