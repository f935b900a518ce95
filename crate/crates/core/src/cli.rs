//! The `pfilter` command line.
//!
//! Data goes to standard output, diagnostics to standard error. Exit status
//! is 0 on success, 1 on runtime failure and 2 on a usage error.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytics::{
    expected_fpr, fpr_curve, insert_element, optimal_hash_count, query_element, required_bits,
    write_curve_csv,
};
use crate::cuckoo::{CuckooConfig, DEFAULT_FINGERPRINT_BITS, DEFAULT_MAX_KICKS, DEFAULT_SLOTS_PER_BUCKET};
use crate::debruijn::{assemble, evaluate, simulate_reads, AssemblyConfig, Genome, Metrics, Read};
use crate::{
    AnyFilter, BlockedBloomFilter, BloomFilter, CountingBloomFilter, CuckooFilter, FilterKind,
    FuzzyFoldedFilter, MembershipFilter, QuotientFilter,
};

const DEFAULT_M: u64 = 1 << 20;
const DEFAULT_H: u32 = 5;
const DEFAULT_Q: u8 = 16;
const DEFAULT_R: u8 = 8;
const DEFAULT_BUCKETS: u64 = 1 << 16;

#[derive(Debug, Parser)]
#[command(name = "pfilter", version, about = "Probabilistic set-membership filters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hash count, filter size and bits per element for a target false positive rate.
    Calc {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        fpr: f64,
    },
    /// Build a filter from newline-delimited elements and save it.
    Build {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print `true` or `false` for each input line.
    Query {
        #[arg(long)]
        filter: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Predicted and measured false positive rate, load and probes per query.
    Bench {
        #[command(flatten)]
        filter: FilterArgs,
        /// Elements inserted, as a fraction of the bit or slot count.
        #[arg(long, default_value_t = 0.1)]
        ratio: f64,
        #[arg(long, default_value_t = 100_000)]
        queries: u64,
    },
    /// Predicted and measured false positive rate across load ratios.
    FprCurve {
        #[arg(long, default_value_t = DEFAULT_H)]
        h: u32,
        #[arg(long, default_value_t = 0.01)]
        min: f64,
        #[arg(long, default_value_t = 0.3)]
        max: f64,
        #[arg(long, default_value_t = 30)]
        steps: usize,
        #[arg(long, default_value_t = 100_000)]
        queries: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Screen input lines with a filter and confirm positives against an exact list.
    Twotier {
        #[arg(long)]
        filter: PathBuf,
        #[arg(long)]
        exact: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Assemble reads with a Bloom-filter De Bruijn graph and score the contigs.
    Assemble(AssembleArgs),
}

#[derive(Debug, Args)]
struct FilterArgs {
    #[arg(long)]
    kind: FilterKind,
    /// Bit budget (bloom, counting, blocked, fuzzyfold).
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    h: Option<u32>,
    /// Quotient bits (quotient).
    #[arg(long)]
    q: Option<u8>,
    /// Remainder bits (quotient).
    #[arg(long)]
    r: Option<u8>,
    /// Bucket count, a power of two (cuckoo).
    #[arg(long)]
    buckets: Option<u64>,
    #[arg(long)]
    counter_width: Option<u32>,
    #[arg(long)]
    block_bits: Option<u32>,
    /// Fill ratio at which a sub-filter stops taking inserts (fuzzyfold).
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    fingerprint_bits: Option<u8>,
    #[arg(long)]
    slots_per_bucket: Option<u8>,
    #[arg(long)]
    max_kicks: Option<u32>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct AssembleArgs {
    /// Genome file, one sequence with line breaks ignored. Random if omitted.
    #[arg(long)]
    genome: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    genome_len: usize,
    /// Reads file, one read per line. Simulated from the genome if omitted.
    #[arg(long)]
    reads: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    read_len: usize,
    #[arg(long, default_value_t = 10.0)]
    coverage: f64,
    #[arg(long, default_value_t = 0.0)]
    error_rate: f64,
    #[arg(long, default_value_t = 25)]
    k: usize,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    h: Option<u32>,
    /// Minimum contig length in bases.
    #[arg(long)]
    solid: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Where to write contigs, one per line.
    #[arg(long)]
    contigs: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

fn usage(msg: impl Display) -> Failure {
    Failure::Usage(msg.to_string())
}

fn runtime(msg: impl Display) -> Failure {
    Failure::Runtime(msg.to_string())
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::InvalidParameter(_) => usage(e),
            _ => runtime(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        runtime(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

pub fn run() -> i32 {
    run_with(std::env::args_os())
}

/// Parses `args` (including the program name) and executes the command.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = execute(cli.command, &mut out).and_then(|()| out.flush().map_err(Failure::from));
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `pfilter help` for usage");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn execute(command: Command, out: &mut impl Write) -> Outcome {
    match command {
        Command::Calc { n, fpr } => calc(n, fpr, out),
        Command::Build { filter, input, out: path } => build(&filter, &input, &path),
        Command::Query { filter, input } => query(&filter, &input, out),
        Command::Bench { filter, ratio, queries } => bench(&filter, ratio, queries, out),
        Command::FprCurve { h, min, max, steps, queries, seed, out: path } => {
            let rows = fpr_curve(h, min, max, steps, queries, seed)?;
            let config = format!("# fpr-curve h={h} min={min} max={max} steps={steps} queries={queries} seed={seed}");
            match path {
                Some(path) => {
                    let mut file = BufWriter::new(create(&path)?);
                    writeln!(file, "{config}")?;
                    write_curve_csv(&mut file, &rows)?;
                    file.flush()?;
                }
                None => {
                    writeln!(out, "{config}")?;
                    write_curve_csv(&mut *out, &rows)?;
                }
            }
            Ok(())
        }
        Command::Twotier { filter, exact, input } => twotier(&filter, &exact, &input, out),
        Command::Assemble(args) => assemble_cmd(&args, out),
    }
}

fn calc(n: u64, fpr: f64, out: &mut impl Write) -> Outcome {
    let h = optimal_hash_count(fpr)?;
    let m = required_bits(n, fpr)?;
    writeln!(out, "h_real,h,m,bits_per_element")?;
    writeln!(out, "{},{},{},{}", h.real, h.rounded, m, m as f64 / n as f64)?;
    Ok(())
}

/// Builds an empty filter of `args.kind`, rejecting flags that do not apply to it.
fn new_filter(args: &FilterArgs) -> std::result::Result<AnyFilter, Failure> {
    let kind = args.kind;
    let given = [
        ("--m", args.m.is_some(), matches!(kind, FilterKind::Bloom | FilterKind::Counting | FilterKind::Blocked | FilterKind::FuzzyFolded)),
        ("--h", args.h.is_some(), matches!(kind, FilterKind::Bloom | FilterKind::Counting | FilterKind::Blocked | FilterKind::FuzzyFolded)),
        ("--q", args.q.is_some(), kind == FilterKind::Quotient),
        ("--r", args.r.is_some(), kind == FilterKind::Quotient),
        ("--buckets", args.buckets.is_some(), kind == FilterKind::Cuckoo),
        ("--counter-width", args.counter_width.is_some(), kind == FilterKind::Counting),
        ("--block-bits", args.block_bits.is_some(), kind == FilterKind::Blocked),
        ("--threshold", args.threshold.is_some(), kind == FilterKind::FuzzyFolded),
        ("--fingerprint-bits", args.fingerprint_bits.is_some(), kind == FilterKind::Cuckoo),
        ("--slots-per-bucket", args.slots_per_bucket.is_some(), kind == FilterKind::Cuckoo),
        ("--max-kicks", args.max_kicks.is_some(), kind == FilterKind::Cuckoo),
    ];
    if let Some((flag, _, _)) = given.iter().find(|(_, set, applies)| *set && !applies) {
        return Err(usage(format!("{flag} does not apply to {kind} filters")));
    }
    let (m, h, seed) = (args.m.unwrap_or(DEFAULT_M), args.h.unwrap_or(DEFAULT_H), args.seed);
    let filter: AnyFilter = match kind {
        FilterKind::Bloom => BloomFilter::new(m, h, seed)?.into(),
        FilterKind::Counting => match args.counter_width {
            Some(w) => CountingBloomFilter::with_counter_width(m, h, seed, w)?,
            None => CountingBloomFilter::new(m, h, seed)?,
        }
        .into(),
        FilterKind::Blocked => match args.block_bits {
            Some(b) => BlockedBloomFilter::with_block_bits(m, h, seed, b)?,
            None => BlockedBloomFilter::new(m, h, seed)?,
        }
        .into(),
        FilterKind::Quotient => {
            QuotientFilter::new(args.q.unwrap_or(DEFAULT_Q), args.r.unwrap_or(DEFAULT_R), seed)?.into()
        }
        FilterKind::FuzzyFolded => match args.threshold {
            Some(t) => FuzzyFoldedFilter::with_threshold(m, h, seed, t)?,
            None => FuzzyFoldedFilter::new(m, h, seed)?,
        }
        .into(),
        FilterKind::Cuckoo => {
            let buckets = args.buckets.unwrap_or(DEFAULT_BUCKETS);
            if !buckets.is_power_of_two() {
                return Err(usage(format!("--buckets {buckets} is not a power of two")));
            }
            let config = CuckooConfig::new(buckets.trailing_zeros() as u8, seed)
                .slots_per_bucket(args.slots_per_bucket.unwrap_or(DEFAULT_SLOTS_PER_BUCKET))
                .fingerprint_bits(args.fingerprint_bits.unwrap_or(DEFAULT_FINGERPRINT_BITS))
                .max_kicks(args.max_kicks.unwrap_or(DEFAULT_MAX_KICKS));
            CuckooFilter::new(config)?.into()
        }
    };
    Ok(filter)
}

fn open(path: &Path) -> std::result::Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| runtime(format!("cannot read {}: {e}", path.display())))
}

fn create(path: &Path) -> std::result::Result<fs::File, Failure> {
    fs::File::create(path).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

/// Splits on `\n`. A trailing newline does not start an extra element.
fn lines(bytes: &[u8]) -> Vec<&[u8]> {
    if bytes.is_empty() {
        return Vec::new();
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    body.split(|&b| b == b'\n').collect()
}

fn load_filter(path: &Path) -> std::result::Result<AnyFilter, Failure> {
    AnyFilter::from_bytes(&open(path)?)
        .map_err(|e| runtime(format!("cannot decode {}: {e}", path.display())))
}

fn build(args: &FilterArgs, input: &Path, out: &Path) -> Outcome {
    let mut filter = new_filter(args)?;
    let data = open(input)?;
    for (i, line) in lines(&data).into_iter().enumerate() {
        filter
            .try_insert(line)
            .map_err(|e| runtime(format!("insert of element {i} (line {}) failed: {e}", i + 1)))?;
    }
    fs::write(out, filter.to_bytes())
        .map_err(|e| runtime(format!("cannot write {}: {e}", out.display())))?;
    eprintln!("built {} filter with {} elements, seed {}", args.kind, filter.len(), args.seed);
    Ok(())
}

fn query(filter: &Path, input: &Path, out: &mut impl Write) -> Outcome {
    let filter = load_filter(filter)?;
    let data = open(input)?;
    for line in lines(&data) {
        writeln!(out, "{}", filter.contains(line))?;
    }
    Ok(())
}

fn bench(args: &FilterArgs, ratio: f64, queries: u64, out: &mut impl Write) -> Outcome {
    if !(ratio >= 0.0 && ratio.is_finite()) {
        return Err(usage(format!("--ratio {ratio} must be non-negative")));
    }
    if queries == 0 {
        return Err(usage("--queries must be positive"));
    }
    let mut filter = new_filter(args)?;
    let (size, h) = match &filter {
        AnyFilter::Quotient(f) => (f.capacity(), 0),
        AnyFilter::Cuckoo(f) => (f.capacity(), 0),
        _ => (args.m.unwrap_or(DEFAULT_M), args.h.unwrap_or(DEFAULT_H)),
    };
    let n = (ratio * size as f64).round() as u64;
    let seed = args.seed;
    for i in 0..n {
        filter
            .try_insert(&insert_element(seed, i))
            .map_err(|e| runtime(format!("insert of element {i} failed: {e}")))?;
    }
    if let Some(i) = (0..n).find(|&i| !filter.contains(&insert_element(seed, i))) {
        return Err(runtime(crate::Error::FalseNegative(i)));
    }
    let (mut hits, mut probes, mut max_probes) = (0u64, 0u64, 0u64);
    for j in 0..queries {
        filter.reset_probe_counter();
        hits += filter.contains(&query_element(seed, j)) as u64;
        let p = filter.read_probe_counter();
        probes += p;
        max_probes = max_probes.max(p);
    }
    let load = match &filter {
        AnyFilter::Quotient(f) => f.load(),
        AnyFilter::Cuckoo(f) => f.load_factor(),
        _ => n as f64 / size as f64,
    };
    writeln!(
        out,
        "# bench kind={} size={size} h={h} ratio={ratio} queries={queries} seed={seed}",
        args.kind
    )?;
    writeln!(out, "kind,m,h,n,predicted_fpr,measured_fpr,load,mean_probes,max_probes")?;
    writeln!(
        out,
        "{},{size},{h},{n},{},{},{load},{},{max_probes}",
        args.kind,
        expected_fpr(&filter),
        hits as f64 / queries as f64,
        probes as f64 / queries as f64,
    )?;
    Ok(())
}

fn twotier(filter: &Path, exact: &Path, input: &Path, out: &mut impl Write) -> Outcome {
    let filter = load_filter(filter)?;
    let exact_data = open(exact)?;
    let truth: HashSet<&[u8]> = lines(&exact_data).into_iter().collect();
    let data = open(input)?;
    let (mut absent, mut confirmed, mut false_pos) = (0u64, 0u64, 0u64);
    for line in lines(&data) {
        let verdict = if !filter.contains(line) {
            absent += 1;
            "definitely-absent"
        } else if truth.contains(line) {
            confirmed += 1;
            "confirmed-present"
        } else {
            false_pos += 1;
            "filter-false-positive"
        };
        writeln!(out, "{verdict}")?;
    }
    let total = absent + confirmed + false_pos;
    eprintln!(
        "{total} lines: {absent} definitely-absent, {confirmed} confirmed-present, {false_pos} filter-false-positive; {} exact lookups",
        confirmed + false_pos
    );
    Ok(())
}

fn assemble_cmd(args: &AssembleArgs, out: &mut impl Write) -> Outcome {
    if args.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let genome = match &args.genome {
        Some(path) => {
            let text = String::from_utf8(open(path)?)
                .map_err(|_| runtime(format!("{} is not text", path.display())))?;
            Genome::parse(&text)?
        }
        None => Genome::random(args.genome_len, args.seed),
    };
    let reads: Vec<Read> = match &args.reads {
        Some(path) => {
            let data = open(path)?;
            let reads: Vec<Read> = lines(&data)
                .into_iter()
                .filter(|l| !l.is_empty())
                .map(|l| Read { bases: l.to_vec(), origin: 0 })
                .collect();
            let longest = reads.iter().map(|r| r.bases.len()).max().unwrap_or(0);
            if args.k > longest {
                return Err(usage(format!("--k {} exceeds the longest read ({longest} bases)", args.k)));
            }
            reads
        }
        None => {
            if args.k > args.read_len {
                return Err(usage(format!(
                    "--k {} exceeds the read length {}",
                    args.k, args.read_len
                )));
            }
            simulate_reads(&genome, args.read_len, args.coverage, args.error_rate, args.seed)?
        }
    };
    let config = AssemblyConfig {
        k: args.k,
        m: args.m,
        h: args.h,
        seed: args.seed,
        solid_threshold: args.solid,
    };
    let contigs = assemble(&reads, &config)?;
    if let Some(path) = &args.contigs {
        let mut file = BufWriter::new(create(path)?);
        for c in &contigs {
            file.write_all(c)?;
            file.write_all(b"\n")?;
        }
        file.flush()?;
    }
    let metrics = evaluate(&contigs, &genome);
    writeln!(
        out,
        "# assemble genome_len={} reads={} read_len={} coverage={} error_rate={} k={} m={} h={} solid={} seed={}",
        genome.len(),
        reads.len(),
        args.read_len,
        args.coverage,
        args.error_rate,
        args.k,
        opt(args.m),
        opt(args.h),
        opt(args.solid),
        args.seed,
    )?;
    writeln!(out, "{}", Metrics::csv_header())?;
    writeln!(out, "{}", metrics.csv_row())?;
    eprintln!("{} contigs", contigs.len());
    Ok(())
}

fn opt<T: Display>(v: Option<T>) -> String {
    v.map_or_else(|| "auto".to_string(), |v| v.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_splitting() {
        assert!(lines(b"").is_empty());
        assert_eq!(lines(b"a\nb\n"), vec![&b"a"[..], b"b"]);
        assert_eq!(lines(b"a\nb"), vec![&b"a"[..], b"b"]);
        assert_eq!(lines(b"\n"), vec![&b""[..]]);
        assert_eq!(lines(b"a\r\n"), vec![&b"a\r"[..]]);
    }

    #[test]
    fn calc_reports_power_of_two_target() {
        let mut out = Vec::new();
        calc(1_000_000, 1.0 / 1024.0, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[1], "10");
    }

    #[test]
    fn inapplicable_flags_rejected() {
        let cli = Cli::try_parse_from(["pfilter", "bench", "--kind", "bloom", "--q", "10"]).unwrap();
        let Command::Bench { filter, .. } = cli.command else { panic!() };
        assert!(matches!(new_filter(&filter), Err(Failure::Usage(_))));
    }
}
