use std::collections::HashSet;

use super::{Read, ALPHABET};
use crate::analytics::{optimal_hash_count, required_bits};
use crate::bloom::BloomFilter;
use crate::error::{invalid, Result};

/// Fill target used to size the filter when no size is given.
pub const DEFAULT_SIZING_FPR: f64 = 0.02;

/// Upper bound on look-ahead nodes per branch, so that a dense patch of
/// false positives cannot make trimming exponential.
const LOOKAHEAD_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// De Bruijn graph whose vertex set is a Bloom filter of k-mers.
#[derive(Debug, Clone)]
pub struct KmerGraph {
    filter: BloomFilter,
    k: usize,
    solid_threshold: usize,
}

impl KmerGraph {
    /// An empty graph. `solid_threshold` defaults to `2k`.
    pub fn new(k: usize, m: u64, h: u32, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        Ok(Self {
            filter: BloomFilter::new(m, h, seed)?,
            k,
            solid_threshold: 2 * k,
        })
    }

    /// Inserts every k-mer of every read.
    pub fn load(reads: &[Read], k: usize, m: u64, h: u32, seed: u64) -> Result<Self> {
        if let Some(r) = reads.iter().find(|r| r.bases.len() < k) {
            return Err(invalid(format!(
                "read of length {} is shorter than k = {k}",
                r.bases.len()
            )));
        }
        let mut g = Self::new(k, m, h, seed)?;
        for r in reads {
            g.add_sequence(&r.bases);
        }
        Ok(g)
    }

    pub fn with_solid_threshold(mut self, bases: usize) -> Self {
        self.solid_threshold = bases;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn solid_threshold(&self) -> usize {
        self.solid_threshold
    }

    pub fn filter(&self) -> &BloomFilter {
        &self.filter
    }

    pub fn add_sequence(&mut self, seq: &[u8]) {
        for kmer in seq.windows(self.k) {
            self.filter.insert(kmer);
        }
    }

    /// Adds a single vertex.
    pub fn insert_kmer(&mut self, kmer: &[u8]) {
        assert_eq!(kmer.len(), self.k, "k-mer length");
        self.filter.insert(kmer);
    }

    pub fn contains(&self, kmer: &[u8]) -> bool {
        self.filter.contains(kmer)
    }

    pub fn successors(&self, kmer: &[u8]) -> Vec<Vec<u8>> {
        self.neighbors(kmer, Direction::Forward)
    }

    pub fn predecessors(&self, kmer: &[u8]) -> Vec<Vec<u8>> {
        self.neighbors(kmer, Direction::Backward)
    }

    pub fn neighbors(&self, kmer: &[u8], dir: Direction) -> Vec<Vec<u8>> {
        ALPHABET
            .iter()
            .map(|&s| {
                let mut next = Vec::with_capacity(kmer.len());
                match dir {
                    Direction::Forward => {
                        next.extend_from_slice(&kmer[1..]);
                        next.push(s);
                    }
                    Direction::Backward => {
                        next.push(s);
                        next.extend_from_slice(&kmer[..kmer.len() - 1]);
                    }
                }
                next
            })
            .filter(|c| self.contains(c))
            .collect()
    }

    /// True if some path of more than `k` nodes starts at `node`.
    fn survives(&self, node: &[u8], dir: Direction) -> bool {
        let mut budget = LOOKAHEAD_BUDGET;
        self.reaches(node, dir, self.k, &mut budget)
    }

    fn reaches(&self, node: &[u8], dir: Direction, remaining: usize, budget: &mut usize) -> bool {
        if remaining == 0 || *budget == 0 {
            return true;
        }
        *budget -= 1;
        self.neighbors(node, dir)
            .iter()
            .any(|n| self.reaches(n, dir, remaining - 1, budget))
    }

    /// Candidates that continue for more than `k` nodes.
    fn trimmed(&self, node: &[u8], dir: Direction) -> Vec<Vec<u8>> {
        let cands = self.neighbors(node, dir);
        if cands.len() < 2 {
            return cands;
        }
        cands.into_iter().filter(|c| self.survives(c, dir)).collect()
    }

    /// If every branch walks without further ambiguity into one common node
    /// at the same depth, within `k + 1` steps, returns the first branch.
    fn pop_bubble(&self, branches: &[Vec<u8>], dir: Direction) -> Option<Vec<u8>> {
        let walks: Vec<Vec<Vec<u8>>> = branches
            .iter()
            .map(|b| {
                let mut walk = vec![b.clone()];
                while walk.len() <= self.k + 1 {
                    let next = self.trimmed(walk.last().unwrap(), dir);
                    if next.len() != 1 {
                        break;
                    }
                    walk.extend(next);
                }
                walk
            })
            .collect();
        let depth = walks.iter().map(Vec::len).min()?;
        (1..depth)
            .any(|d| walks.iter().all(|w| w[d] == walks[0][d]))
            .then(|| branches[0].clone())
    }

    /// Walks from `start` until a dead end, an unresolvable branch, or a
    /// node already in `used`. Visited nodes are added to `used`; the
    /// returned path excludes `start`.
    fn walk(&self, start: &[u8], dir: Direction, used: &mut HashSet<Vec<u8>>) -> Vec<Vec<u8>> {
        let mut path = Vec::new();
        let mut cur = start.to_vec();
        loop {
            let alive = self.trimmed(&cur, dir);
            let next = match alive.len() {
                0 => break,
                1 => alive.into_iter().next().unwrap(),
                _ => match self.pop_bubble(&alive, dir) {
                    Some(n) => n,
                    None => break,
                },
            };
            if !used.insert(next.clone()) {
                break;
            }
            path.push(next.clone());
            cur = next;
        }
        path
    }

    /// Path of k-mers from `start` in `dir`, beginning with `start`.
    pub fn extend(&self, start: &[u8], dir: Direction) -> Result<Vec<Vec<u8>>> {
        if start.len() != self.k || !self.contains(start) {
            return Err(invalid("start k-mer is not in the graph"));
        }
        let mut used = HashSet::from([start.to_vec()]);
        let mut path = vec![start.to_vec()];
        path.extend(self.walk(start, dir, &mut used));
        Ok(path)
    }

    /// Seeds a bidirectional extension at every read k-mer not yet used by
    /// an earlier extension and keeps contigs of at least `solid_threshold`
    /// bases.
    pub fn contigs(&self, reads: &[Read]) -> Vec<Vec<u8>> {
        let mut used: HashSet<Vec<u8>> = HashSet::new();
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        let mut out = Vec::new();
        for read in reads {
            for seed in read.bases.windows(self.k) {
                if !used.insert(seed.to_vec()) {
                    continue;
                }
                let back = self.walk(seed, Direction::Backward, &mut used);
                let fwd = self.walk(seed, Direction::Forward, &mut used);
                let mut contig = back.last().map_or(seed.to_vec(), Clone::clone);
                contig.extend(back.iter().rev().skip(1).map(|k| k[self.k - 1]));
                if !back.is_empty() {
                    contig.push(seed[self.k - 1]);
                }
                contig.extend(fwd.iter().map(|k| k[self.k - 1]));
                if contig.len() >= self.solid_threshold && seen.insert(contig.clone()) {
                    out.push(contig);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyConfig {
    pub k: usize,
    /// Filter bits. `None` sizes the filter for a 2% false positive rate
    /// over the number of read k-mers.
    pub m: Option<u64>,
    /// Hash count. `None` picks the count for a 2% false positive rate.
    pub h: Option<u32>,
    pub seed: u64,
    /// Minimum contig length in bases. `None` means `2k`.
    pub solid_threshold: Option<usize>,
}

impl AssemblyConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            m: None,
            h: None,
            seed,
            solid_threshold: None,
        }
    }
}

/// Loads `reads` into a k-mer graph and returns its contigs.
pub fn assemble(reads: &[Read], config: &AssemblyConfig) -> Result<Vec<Vec<u8>>> {
    let k = config.k;
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if reads.is_empty() {
        return Ok(Vec::new());
    }
    let kmers: u64 = reads
        .iter()
        .map(|r| r.bases.len().saturating_sub(k - 1) as u64)
        .sum();
    let m = match config.m {
        Some(m) => m,
        None => required_bits(kmers.max(1), DEFAULT_SIZING_FPR)?.max(crate::bloom::MIN_BITS),
    };
    let h = match config.h {
        Some(h) => h,
        None => optimal_hash_count(DEFAULT_SIZING_FPR)?.rounded,
    };
    let graph = KmerGraph::load(reads, k, m, h, config.seed)?
        .with_solid_threshold(config.solid_threshold.unwrap_or(2 * k));
    Ok(graph.contigs(reads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::predicted_fpr;
    use crate::debruijn::{evaluate, simulate_reads, Genome};

    fn read(s: &str) -> Read {
        Read {
            bases: s.as_bytes().to_vec(),
            origin: 0,
        }
    }

    #[test]
    fn loads_every_kmer() {
        let g = KmerGraph::load(&[read("ACGTA")], 3, 1024, 3, 0).unwrap();
        for k in ["ACG", "CGT", "GTA"] {
            assert!(g.contains(k.as_bytes()));
        }
        let g = KmerGraph::load(&[read("ACG")], 3, 1024, 3, 0).unwrap();
        assert_eq!(g.filter().inserted(), 1);
        assert!(KmerGraph::load(&[read("AC")], 3, 1024, 3, 0).is_err());
    }

    #[test]
    fn fill_matches_prediction_for_distinct_kmers() {
        let genome = Genome::random(20_000, 4);
        let reads = simulate_reads(&genome, 100, 5.0, 0.0, 4).unwrap();
        let (m, h) = (1 << 17, 3);
        let g = KmerGraph::load(&reads, 21, m, h, 4).unwrap();
        let distinct: HashSet<&[u8]> = reads.iter().flat_map(|r| r.bases.windows(21)).collect();
        // Expected fill is 1 - (1 - 1/m)^(hn), which is the exact FPR at h = 1.
        let expect = predicted_fpr(m, 1, h as u64 * distinct.len() as u64).unwrap().exact;
        let fill = g.filter().fill_ratio();
        assert!((fill - expect).abs() <= 0.15 * expect, "{fill} vs {expect}");
    }

    #[test]
    fn successors_of_small_genome() {
        let g = KmerGraph::load(&[read("ACGTT")], 3, 4096, 4, 1).unwrap();
        assert_eq!(g.successors(b"ACG"), vec![b"CGT".to_vec()]);
        assert_eq!(g.predecessors(b"GTT"), vec![b"CGT".to_vec()]);
        let empty = KmerGraph::new(3, 4096, 4, 1).unwrap();
        assert!(empty.successors(b"ACG").is_empty());
    }

    #[test]
    fn spurious_successors_are_false_positives_only() {
        let genome = Genome::random(200, 6);
        let g = KmerGraph::load(&[read(std::str::from_utf8(genome.as_bytes()).unwrap())], 5, 64, 2, 6)
            .unwrap();
        let truth: HashSet<&[u8]> = genome.as_bytes().windows(5).collect();
        let mut spurious = 0;
        for kmer in &truth {
            let found = g.successors(kmer);
            for s in ALPHABET {
                let mut c = kmer[1..].to_vec();
                c.push(s);
                let exact = truth.contains(c.as_slice());
                let reported = found.contains(&c);
                assert!(reported || !exact, "false negative successor");
                spurious += (reported && !exact) as usize;
            }
        }
        assert!(spurious > 0);
    }

    #[test]
    fn linear_genome_extends_fully() {
        let genome = Genome::random(2000, 7);
        let g = KmerGraph::load(&[read(std::str::from_utf8(genome.as_bytes()).unwrap())], 25, 1 << 16, 5, 7)
            .unwrap();
        let path = g.extend(&genome.as_bytes()[..25], Direction::Forward).unwrap();
        assert_eq!(path.len(), 2000 - 24);
        assert!(g.extend(b"AAAAAAAAAAAAAAAAAAAAAAAAA", Direction::Forward).is_err());
    }

    #[test]
    fn repeat_stops_extension_at_branch() {
        let k = 21;
        let part = |len, seed| Genome::random(len, seed).as_bytes().to_vec();
        let repeat = part(k, 100);
        let (x, y, z) = (part(300, 101), part(300, 102), part(300, 103));
        let genome = [x.clone(), repeat.clone(), y, repeat.clone(), z].concat();
        let g = KmerGraph::load(&[Read { bases: genome.clone(), origin: 0 }], k, 1 << 16, 5, 9).unwrap();
        let path = g.extend(&genome[..k], Direction::Forward).unwrap();
        assert_eq!(path.last().unwrap(), &repeat);
        assert_eq!(path.len(), x.len() + 1);

        let contigs = g.contigs(&[Read { bases: genome.clone(), origin: 0 }]);
        assert!(contigs.len() >= 2);
        let m = evaluate(&contigs, &Genome::new(genome).unwrap());
        assert!(m.coverage > 0.99);
    }

    #[test]
    fn one_node_spur_is_trimmed() {
        let genome = Genome::random(1500, 8);
        let reads = simulate_reads(&genome, 100, 10.0, 0.0, 8).unwrap();
        let config = AssemblyConfig {
            m: Some(1 << 18),
            h: Some(5),
            ..AssemblyConfig::new(25, 8)
        };
        let clean = assemble(&reads, &config).unwrap();

        let mut g = KmerGraph::load(&reads, 25, 1 << 18, 5, 8).unwrap();
        let at = &genome.as_bytes()[700..725];
        let mut spur = at[1..].to_vec();
        spur.push(if genome.as_bytes()[725] == b'A' { b'C' } else { b'A' });
        g.insert_kmer(&spur);
        assert_eq!(g.successors(at).len(), 2);
        assert_eq!(g.contigs(&reads), clean);
    }

    #[test]
    fn zero_reads_zero_contigs() {
        assert!(assemble(&[], &AssemblyConfig::new(25, 0)).unwrap().is_empty());
    }

    #[test]
    fn error_free_assembly_is_deterministic_and_complete() {
        let genome = Genome::random(5000, 11);
        let reads = simulate_reads(&genome, 100, 10.0, 0.0, 11).unwrap();
        let a = assemble(&reads, &AssemblyConfig::new(25, 11)).unwrap();
        assert_eq!(a, assemble(&reads, &AssemblyConfig::new(25, 11)).unwrap());
        let m = evaluate(&a, &genome);
        assert!(m.coverage >= 0.99 && m.identity >= 0.999, "{m:?}");
    }
}
