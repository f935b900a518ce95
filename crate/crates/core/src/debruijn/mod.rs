//! Small-scale De Bruijn graph assembly over a Bloom filter.
//!
//! Reads are split into k-mers which are inserted into a Bloom filter. The
//! graph is never materialized: the successors of a k-mer are the four
//! one-base extensions the filter reports present. No reverse-complement
//! canonicalization is done, so reads are assumed to come from one strand.

mod evaluate;
mod graph;

pub use evaluate::{evaluate, n50, Metrics};
pub use graph::{assemble, AssemblyConfig, Direction, KmerGraph};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

pub const ALPHABET: [u8; 4] = *b"ACGT";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genome {
    sequence: Vec<u8>,
}

impl Genome {
    /// Accepts upper-case `A`, `C`, `G`, `T` only.
    pub fn new(sequence: impl Into<Vec<u8>>) -> Result<Self> {
        let sequence = sequence.into();
        if sequence.is_empty() {
            return Err(invalid("genome is empty"));
        }
        if let Some(p) = sequence.iter().position(|b| !ALPHABET.contains(b)) {
            return Err(invalid(format!(
                "symbol {:?} at position {p} is not one of A, C, G, T",
                sequence[p] as char
            )));
        }
        Ok(Self { sequence })
    }

    /// Parses plain text, ignoring line breaks and surrounding whitespace.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(
            text.bytes()
                .filter(|b| !b.is_ascii_whitespace())
                .collect::<Vec<u8>>(),
        )
    }

    /// Uniform random sequence of `len` bases.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            sequence: (0..len).map(|_| ALPHABET[rng.gen_range(0..4)]).collect(),
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Read {
    pub bases: Vec<u8>,
    /// Offset of the read in the source genome.
    pub origin: usize,
}

/// `ceil(coverage * |genome| / read_len)` reads at uniform offsets, each base
/// replaced by a different random base with probability `error_rate`.
pub fn simulate_reads(
    genome: &Genome,
    read_len: usize,
    coverage: f64,
    error_rate: f64,
    seed: u64,
) -> Result<Vec<Read>> {
    if read_len == 0 || read_len > genome.len() {
        return Err(invalid(format!(
            "read length {read_len} must be in [1, {}]",
            genome.len()
        )));
    }
    if !(coverage > 0.0 && coverage.is_finite()) {
        return Err(invalid(format!("coverage {coverage} must be positive")));
    }
    if !(0.0..1.0).contains(&error_rate) {
        return Err(invalid(format!("error rate {error_rate} outside [0, 1)")));
    }
    let count = (coverage * genome.len() as f64 / read_len as f64).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reads = (0..count)
        .map(|_| {
            let origin = rng.gen_range(0..=genome.len() - read_len);
            let bases = genome.as_bytes()[origin..origin + read_len]
                .iter()
                .map(|&b| {
                    if rng.gen_bool(error_rate) {
                        let shift = rng.gen_range(1..4);
                        let i = ALPHABET.iter().position(|&a| a == b).unwrap();
                        ALPHABET[(i + shift) % 4]
                    } else {
                        b
                    }
                })
                .collect();
            Read { bases, origin }
        })
        .collect();
    Ok(reads)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genome_validation() {
        assert!(Genome::new("ACGTN").is_err());
        assert!(Genome::new("").is_err());
        assert_eq!(Genome::parse("AC\nGT\n").unwrap().as_bytes(), b"ACGT");
        let g = Genome::random(1000, 3);
        assert_eq!(g.len(), 1000);
        assert!(g.as_bytes().iter().all(|b| ALPHABET.contains(b)));
        assert_eq!(g, Genome::random(1000, 3));
    }

    #[test]
    fn error_free_reads_are_substrings() {
        let g = Genome::random(10_000, 1);
        let reads = simulate_reads(&g, 100, 10.0, 0.0, 2).unwrap();
        assert_eq!(reads.len(), 1000);
        for r in &reads {
            assert_eq!(r.bases, &g.as_bytes()[r.origin..r.origin + 100]);
        }
        assert!(simulate_reads(&g, 10_001, 1.0, 0.0, 2).is_err());
        assert_eq!(simulate_reads(&g, 100, 10.0, 0.0, 2).unwrap(), reads);
    }

    #[test]
    fn substitution_rate_matches_binomial() {
        let g = Genome::random(10_000, 1);
        let reads = simulate_reads(&g, 100, 20.0, 0.01, 5).unwrap();
        let total = (reads.len() * 100) as f64;
        let diffs = reads
            .iter()
            .flat_map(|r| r.bases.iter().zip(&g.as_bytes()[r.origin..]))
            .filter(|(a, b)| a != b)
            .count() as f64;
        let sd = (total * 0.01 * 0.99).sqrt();
        assert!((diffs - total * 0.01).abs() < 3.0 * sd, "{diffs} vs {}", total * 0.01);
    }
}
