use std::collections::HashMap;

use super::Genome;

/// Seed length used to anchor contigs on the genome.
const SEED_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Fraction of genome positions covered by an aligned contig.
    pub coverage: f64,
    /// Matching bases over all aligned bases.
    pub identity: f64,
    pub n50: usize,
}

impl Metrics {
    pub fn csv_header() -> &'static str {
        "coverage,identity,n50"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.coverage, self.identity, self.n50)
    }
}

/// Length `L` such that contigs of length at least `L` hold half of all
/// assembled bases. Zero for no contigs.
pub fn n50<T: AsRef<[u8]>>(contigs: &[T]) -> usize {
    let mut lens: Vec<usize> = contigs.iter().map(|c| c.as_ref().len()).collect();
    lens.sort_unstable_by(|a, b| b.cmp(a));
    let total: usize = lens.iter().sum();
    let mut acc = 0;
    for l in lens {
        acc += l;
        if 2 * acc >= total {
            return l;
        }
    }
    0
}

/// Places each contig on the genome without gaps, at the offset most of its
/// seeds agree on, and scores coverage and identity of the placements.
/// Contigs with no seed hit are left unaligned.
pub fn evaluate<T: AsRef<[u8]>>(contigs: &[T], genome: &Genome) -> Metrics {
    let g = genome.as_bytes();
    let seed_len = SEED_LEN.min(g.len());
    let mut index: HashMap<&[u8], Vec<usize>> = HashMap::new();
    for (p, w) in g.windows(seed_len).enumerate() {
        index.entry(w).or_default().push(p);
    }

    let mut covered = vec![false; g.len()];
    let (mut aligned, mut matched) = (0usize, 0usize);
    for contig in contigs {
        let c = contig.as_ref();
        if c.len() < seed_len {
            continue;
        }
        let mut votes: HashMap<isize, usize> = HashMap::new();
        for (o, w) in c.windows(seed_len).enumerate() {
            for &p in index.get(w).into_iter().flatten() {
                *votes.entry(p as isize - o as isize).or_default() += 1;
            }
        }
        let Some((diag, _)) = votes.into_iter().max_by_key(|&(d, n)| (n, -d)) else {
            continue;
        };
        for (o, &base) in c.iter().enumerate() {
            let p = diag + o as isize;
            if p < 0 || p as usize >= g.len() {
                continue;
            }
            let p = p as usize;
            aligned += 1;
            covered[p] = true;
            matched += (g[p] == base) as usize;
        }
    }

    Metrics {
        coverage: covered.iter().filter(|&&c| c).count() as f64 / g.len() as f64,
        identity: if aligned == 0 { 0.0 } else { matched as f64 / aligned as f64 },
        n50: n50(contigs),
    }
}
