//! False positive rate prediction, hash-count and sizing helpers, and
//! empirical measurement.

use std::io::{self, Write};

use crate::bloom::BloomFilter;
use crate::envelope::AnyFilter;
use crate::error::{invalid, Error, Result};
use crate::filter::MembershipFilter;

/// Both forms of the Bloom false positive estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FprPrediction {
    /// `(1 - (1 - 1/m)^(hn))^h`, evaluated in log space.
    pub exact: f64,
    /// `(1 - e^(-hn/m))^h`.
    pub approximate: f64,
}

pub fn predicted_fpr(m: u64, h: u32, n: u64) -> Result<FprPrediction> {
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    if h == 0 {
        return Err(invalid("h must be at least 1"));
    }
    let (m, h, n) = (m as f64, h as f64, n as f64);
    let exact = if m == 1.0 {
        // Every insert sets the only bit.
        if n > 0.0 { 1.0 } else { 0.0 }
    } else {
        (-(h * n * (-1.0 / m).ln_1p()).exp_m1()).powf(h)
    };
    let approximate = (-(-h * n / m).exp_m1()).powf(h);
    Ok(FprPrediction { exact, approximate })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashCount {
    /// `log2(1 / fpr)`.
    pub real: f64,
    /// `real` rounded to nearest, at least 1.
    pub rounded: u32,
}

/// Hash count for a target false positive rate: `h = log2(1 / fpr)`.
///
/// This depends on the target alone. The classical optimum `(m/n) ln 2`
/// gives the same value once `m` is sized for the target.
pub fn optimal_hash_count(target_fpr: f64) -> Result<HashCount> {
    check_fpr(target_fpr)?;
    let real = -target_fpr.log2();
    Ok(HashCount {
        real,
        rounded: (real.round() as u32).max(1),
    })
}

/// Smallest `m` with `predicted_fpr(m, h, n).exact <= target_fpr`, where
/// `h` is [`optimal_hash_count`] of the target.
pub fn required_bits(n: u64, target_fpr: f64) -> Result<u64> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let h = optimal_hash_count(target_fpr)?.rounded;
    let ok = |m: u64| predicted_fpr(m, h, n).map(|p| p.exact <= target_fpr).unwrap_or(false);
    let mut hi = n.max(1);
    while !ok(hi) {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| invalid("required size overflows u64"))?;
    }
    let mut lo = hi / 2;
    // Invariant: !ok(lo) or lo == 0, ok(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn check_fpr(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("false positive rate {p} outside (0, 1)")))
    }
}

/// Expected false positive rate of `filter` in its current state.
///
/// Bit-array kinds use the closed forms in their element count (blocked
/// filters average over Poisson-distributed block loads). Fuzzy-folded
/// filters combine the fill of each stage, treating stages as independent.
/// Quotient and cuckoo filters use the fingerprint collision probability.
pub fn expected_fpr(filter: &AnyFilter) -> f64 {
    match filter {
        AnyFilter::Bloom(f) => flat(f.bit_len(), f.hash_count(), f.inserted()),
        AnyFilter::Counting(f) => flat(f.family().range(), f.family().hash_count(), f.len()),
        AnyFilter::Blocked(f) => {
            let lambda = f.inserted() as f64 / f.block_count() as f64;
            let (bb, h) = (f.block_bits() as f64, f.hash_count() as f64);
            let limit = (lambda + 12.0 * lambda.sqrt() + 24.0).ceil() as u64;
            let mut pmf = (-lambda).exp();
            let mut total = 0.0;
            for k in 0..=limit {
                if k > 0 {
                    pmf *= lambda / k as f64;
                }
                let fill = -((h * k as f64) * (-1.0 / bb).ln_1p()).exp_m1();
                total += pmf * fill.powf(h);
            }
            total
        }
        AnyFilter::Quotient(f) => {
            let p = 0.5f64.powi(f.quotient_bits() as i32 + f.remainder_bits() as i32);
            -((f.live_count() as f64) * (-p).ln_1p()).exp_m1()
        }
        AnyFilter::FuzzyFolded(f) => {
            let h = f.hash_count() as i32;
            let mut pass = (1.0 - f.active_first().fill_ratio().powi(h))
                * (1.0 - f.active_second().fill_ratio().powi(h));
            for layer in f.layers() {
                let n = layer.bucket_count() as f64;
                let (mut a, mut b, mut both) = (0.0, 0.0, 0.0);
                for i in 0..layer.bucket_count() {
                    let (x, y) = layer.code(i);
                    a += x as u8 as f64;
                    b += y as u8 as f64;
                    both += (x && y) as u8 as f64;
                }
                let hit = (a / n).powi(h) + (b / n).powi(h) - (both / n).powi(h);
                pass *= 1.0 - hit;
            }
            1.0 - pass
        }
        AnyFilter::Cuckoo(f) => {
            let c = f.config();
            let p = 1.0 / ((1u64 << c.fingerprint_bits) - 1) as f64;
            let occupied = 2.0 * c.slots_per_bucket as f64 * f.load_factor();
            -(occupied * (-p).ln_1p()).exp_m1()
        }
    }
}

fn flat(m: u64, h: u32, n: u64) -> f64 {
    predicted_fpr(m, h, n).map(|p| p.approximate).unwrap_or(1.0)
}

/// Element `i` of the insert universe.
pub fn insert_element(seed: u64, i: u64) -> Vec<u8> {
    format!("ins:{seed}:{i}").into_bytes()
}

/// Element `i` of the query universe, disjoint from the insert universe.
pub fn query_element(seed: u64, i: u64) -> Vec<u8> {
    format!("qry:{seed}:{i}").into_bytes()
}

/// Inserts `n_insert` elements, checks that every one of them is found, then
/// returns the fraction of `n_query` non-members reported present.
pub fn measure_fpr<F: MembershipFilter>(
    filter: &mut F,
    n_insert: u64,
    n_query: u64,
    seed: u64,
) -> Result<f64> {
    for i in 0..n_insert {
        filter.try_insert(&insert_element(seed, i))?;
    }
    if let Some(i) = (0..n_insert).find(|&i| !filter.contains(&insert_element(seed, i))) {
        return Err(Error::FalseNegative(i));
    }
    Ok(count_positives(filter, 0..n_query, seed) as f64 / n_query.max(1) as f64)
}

fn count_positives<F: MembershipFilter>(filter: &F, range: std::ops::Range<u64>, seed: u64) -> u64 {
    range
        .filter(|&j| filter.contains(&query_element(seed, j)))
        .count() as u64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub ratio: f64,
    pub predicted: f64,
    pub measured: f64,
}

pub const CURVE_BITS: u64 = 1 << 20;

/// Predicted and measured false positive rate at `steps` evenly spaced load
/// ratios `n/m` in `[ratio_min, ratio_max]`, for a standard filter of
/// [`CURVE_BITS`] bits.
///
/// One filter is filled incrementally; each row issues `queries` fresh
/// non-member queries.
pub fn fpr_curve(
    h: u32,
    ratio_min: f64,
    ratio_max: f64,
    steps: usize,
    queries: u64,
    seed: u64,
) -> Result<Vec<CurveRow>> {
    if !(ratio_min > 0.0 && ratio_min < ratio_max) {
        return Err(invalid(format!(
            "ratio range [{ratio_min}, {ratio_max}] must satisfy 0 < min < max"
        )));
    }
    if steps < 2 {
        return Err(invalid("steps must be at least 2"));
    }
    let m = CURVE_BITS;
    let mut filter = BloomFilter::new(m, h, seed)?;
    let mut inserted = 0u64;
    let mut rows = Vec::with_capacity(steps);
    for s in 0..steps {
        let ratio = ratio_min + (ratio_max - ratio_min) * s as f64 / (steps - 1) as f64;
        let n = (ratio * m as f64).round() as u64;
        while inserted < n {
            filter.insert(&insert_element(seed, inserted));
            inserted += 1;
        }
        let base = s as u64 * queries;
        let hits = count_positives(&filter, base..base + queries, seed);
        rows.push(CurveRow {
            ratio,
            predicted: predicted_fpr(m, h, n)?.approximate,
            measured: hits as f64 / queries as f64,
        });
    }
    Ok(rows)
}

pub fn write_curve_csv<W: Write>(mut out: W, rows: &[CurveRow]) -> io::Result<()> {
    writeln!(out, "ratio,predicted_fpr,measured_fpr")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.ratio, r.predicted, r.measured)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_elements_zero_fpr() {
        let p = predicted_fpr(1024, 5, 0).unwrap();
        assert_eq!(p.exact, 0.0);
        assert_eq!(p.approximate, 0.0);
        assert!(predicted_fpr(0, 5, 1).is_err());
        assert!(predicted_fpr(8, 0, 1).is_err());
    }

    #[test]
    fn approximate_at_tenth_load() {
        // (1 - e^-0.5)^5 = 0.00943092922...
        let p = predicted_fpr(1_000_000, 5, 100_000).unwrap();
        assert!((p.approximate - 0.009_430_929_2).abs() < 1e-10, "{}", p.approximate);
    }

    #[test]
    fn flat_region_below_two_percent() {
        for n in [0, 10, 20, 30, 40] {
            assert!(predicted_fpr(1000, 5, n).unwrap().approximate <= 0.02);
        }
    }

    #[test]
    fn hash_count_examples() {
        let h = optimal_hash_count(1.0 / 1024.0).unwrap();
        assert_eq!((h.real, h.rounded), (10.0, 10));
        let h = optimal_hash_count(0.01).unwrap();
        assert!((h.real - 6.643_856).abs() < 1e-5);
        assert_eq!(h.rounded, 7);
        assert_eq!(optimal_hash_count(0.5).unwrap().rounded, 1);
        assert_eq!(optimal_hash_count(0.9).unwrap().rounded, 1);
        assert!(optimal_hash_count(0.0).is_err());
        assert!(optimal_hash_count(1.5).is_err());
        for k in 1..=30 {
            assert_eq!(optimal_hash_count(0.5f64.powi(k)).unwrap().rounded, k as u32);
        }
    }

    #[test]
    fn required_bits_is_minimal_and_under_ten_per_element() {
        let n = 1_000_000;
        let m = required_bits(n, 0.02).unwrap();
        assert!((m as f64 / n as f64) < 10.0);
        let h = optimal_hash_count(0.02).unwrap().rounded;
        assert!(predicted_fpr(m, h, n).unwrap().exact <= 0.02);
        assert!(predicted_fpr(m - 1, h, n).unwrap().exact > 0.02);

        let m2 = required_bits(2 * n, 0.02).unwrap();
        assert!((m2 as i64 - 2 * m as i64).abs() <= 2);
    }

    #[test]
    fn measure_is_deterministic_and_zero_when_empty() {
        let mut f = BloomFilter::new(1 << 12, 3, 1).unwrap();
        assert_eq!(measure_fpr(&mut f, 0, 1000, 5).unwrap(), 0.0);
        let run = || {
            let mut f = BloomFilter::new(1 << 12, 3, 1).unwrap();
            measure_fpr(&mut f, 600, 5000, 5).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn curve_predicted_column_is_monotone() {
        let rows = fpr_curve(5, 0.01, 0.3, 30, 100, 1).unwrap();
        assert_eq!(rows.len(), 30);
        assert!(rows.windows(2).all(|w| w[0].predicted < w[1].predicted));
        let mut csv = Vec::new();
        write_curve_csv(&mut csv, &rows).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("ratio,predicted_fpr,measured_fpr\n"));
        assert_eq!(text.lines().count(), 31);
        assert!(fpr_curve(5, 0.3, 0.1, 30, 10, 1).is_err());
        assert!(fpr_curve(5, 0.1, 0.3, 1, 10, 1).is_err());
    }

    #[test]
    fn expected_fpr_tracks_measurement() {
        use crate::cuckoo::{CuckooConfig, CuckooFilter};
        use crate::{BlockedBloomFilter, FuzzyFoldedFilter, QuotientFilter};
        let filters: Vec<(AnyFilter, u64)> = vec![
            (BloomFilter::new(1 << 16, 5, 1).unwrap().into(), 8000),
            (BlockedBloomFilter::new(1 << 16, 5, 1).unwrap().into(), 8000),
            (FuzzyFoldedFilter::new(1 << 16, 5, 1).unwrap().into(), 12_000),
            (QuotientFilter::new(12, 4, 1).unwrap().into(), 3000),
            (CuckooFilter::new(CuckooConfig::new(10, 1).fingerprint_bits(8)).unwrap().into(), 3500),
        ];
        for (mut f, n) in filters {
            let measured = measure_fpr(&mut f, n, 200_000, 3).unwrap();
            let expected = expected_fpr(&f);
            assert!(
                (measured - expected).abs() <= 0.2 * expected,
                "{}: measured {measured}, expected {expected}",
                f.kind()
            );
        }
    }

    proptest! {
        #[test]
        fn forms_agree_for_large_m(m in 1024u64..1 << 24, h in 1u32..16, load in 0.001f64..0.5) {
            let n = (load * m as f64) as u64;
            let p = predicted_fpr(m, h, n).unwrap();
            if n > 0 {
                prop_assert!((p.exact - p.approximate).abs() <= 0.01 * p.approximate);
            }
        }

        #[test]
        fn monotone_in_n(m in 8u64..1 << 20, h in 1u32..20, n in 0u64..1 << 20) {
            let a = predicted_fpr(m, h, n).unwrap();
            let b = predicted_fpr(m, h, n + 1).unwrap();
            prop_assert!(a.exact <= b.exact);
            prop_assert!(a.approximate <= b.approximate);
        }
    }
}
