use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ffstat_core::exec::DEFAULT_BUDGET;
use ffstat_core::Partition;

/// Exact prime and factorization-type statistics over finite fields.
#[derive(Debug, Parser)]
#[command(name = "ffstat", version)]
pub struct Cli {
    /// Worker threads for scans (FFSTAT_THREADS overrides; default: all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,

    /// Largest enumeration allowed, in polynomials
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,

    /// Accepted and recorded; every computation is exhaustive
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Print the projected enumeration size and exit
    #[arg(long, global = true)]
    pub dry_run: bool,

    /// Emit `timing_ms` as null so repeated runs are byte-identical
    #[arg(long, global = true)]
    pub no_timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    /// Per-cell table; scans only
    Csv,
    /// The headline value only
    Text,
}

#[derive(Clone, Debug, Args)]
pub struct FieldArgs {
    /// Characteristic
    #[arg(long)]
    pub p: u64,
    /// Extension degree
    #[arg(long, default_value_t = 1)]
    pub nu: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Number of monic primes of degree k
    Pi {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: usize,
        /// Also count by exhaustive factorization
        #[arg(long)]
        enumerate: bool,
    },
    /// Number of monic degree-k polynomials of factorization type lambda
    PiType {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        lambda: Partition,
        #[arg(long)]
        enumerate: bool,
    },
    /// Type census of the short interval I(f, m)
    Interval {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        f: String,
        #[arg(long)]
        lambda: Option<Partition>,
    },
    /// Type census of degree-k members of f mod D
    Progression {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: usize,
        /// Monic modulus D
        #[arg(long)]
        d: String,
        /// Residue, coprime to D
        #[arg(long)]
        f: String,
        #[arg(long)]
        lambda: Option<Partition>,
    },
    /// Deviation from P(lambda) q^(m+1) over every interval of M(k, q)
    ScanIntervals {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        lambda: Partition,
        /// Include every cell in the report
        #[arg(long)]
        per_cell: bool,
    },
    /// Deviation over residue classes modulo every monic D of degree k - m - 1
    ScanProgressions {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        lambda: Partition,
        #[arg(long)]
        per_cell: bool,
        /// Stop after this many cells, in canonical order
        #[arg(long)]
        max_cells: Option<u64>,
    },
    /// Exact mean and variance of nu(.; m) over M(k, q)
    MeanVariance {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
    },
    /// Var nu / q^(m+1) for several q, next to the limit k - m - 2
    VarianceTrend {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        /// Field orders, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        qs: Vec<u64>,
    },
    /// Monic g of degree k/d with g^d in I(f, m)
    Radical {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        f: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
    },
    /// Sum of Lambda over I(f, m), skipping multiples of t
    Nu {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        f: String,
        #[arg(long)]
        m: usize,
        /// Also split nu into prime and prime-power terms
        #[arg(long)]
        decompose: bool,
    },
    /// Small-m intervals around t^k with known prime counts
    #[command(subcommand)]
    Counterexample(Counterexample),
    /// Which exclusion, if any, applies to an interval or progression
    Hypotheses {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        f: String,
        /// Modulus; classifies the progression f mod D instead
        #[arg(long)]
        d: Option<String>,
    },
    /// Number of units modulo D
    Totient {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        d: String,
    },
    /// Probability of cycle type lambda in S_k
    PartitionProb {
        #[arg(long)]
        lambda: Partition,
    },
}

#[derive(Debug, Subcommand)]
pub enum Counterexample {
    /// Primes among t^k + a
    M0 {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: usize,
    },
    /// Primes in I(t^k, 1) over F_(p^(2n))
    M1 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Variant::P2)]
        variant: Variant,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// k = p^2
    #[value(name = "p2")]
    P2,
    /// k = p^2 + 1
    #[value(name = "p2+1")]
    P2Plus1,
}
