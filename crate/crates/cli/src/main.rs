//! `mpme` command-line tool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

/// Mean and variance estimation for many small-sample populations.
#[derive(Debug, Parser)]
#[command(name = "mpme", version, about)]
struct Cli {
    /// Worker threads for trial runners (0 uses every core).
    #[arg(long, global = true, env = "MPME_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn a prior from a dataset and write per-population estimates.
    Estimate(EstimateArgs),
    /// Monte Carlo comparison on the synthetic generators.
    Synth(SynthArgs),
    /// Subsampling comparison on a measured dataset.
    Bootstrap(BootstrapArgs),
    /// Cross-check production numerics against brute-force oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Prior {
    Nix,
    Uni,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UniVarianceArg {
    Unbiased,
    Mle,
}

impl From<UniVarianceArg> for mpme::UniVariance {
    fn from(v: UniVarianceArg) -> Self {
        match v {
            UniVarianceArg::Unbiased => mpme::UniVariance::Unbiased,
            UniVarianceArg::Mle => mpme::UniVariance::Mle,
        }
    }
}

#[derive(Debug, Args)]
struct LearnArgs {
    /// Variance estimate clamped by the UNI prior.
    #[arg(long, value_enum, default_value_t = UniVarianceArg::Unbiased)]
    uni_variance: UniVarianceArg,

    /// Cap on NIX κ0 and ν0 as a multiple of the total observation count.
    #[arg(long, default_value_t = 1.0, conflicts_with = "no_pseudo_count_cap")]
    pseudo_count_cap: f64,

    /// Leave NIX κ0 and ν0 unbounded.
    #[arg(long)]
    no_pseudo_count_cap: bool,

    /// Maximum Nelder-Mead iterations per restart.
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Dataset file (`.csv` or `.json`).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    prior: Prior,
    /// Report the NIX variance as ν_n σ_n² / (ν_n − 1).
    #[arg(long)]
    unbiased_variance: bool,
    /// Prune populations more than k scaled MADs from the median mean before learning.
    #[arg(long, value_name = "K")]
    prune_outliers: Option<f64>,
    /// Recorded in the report; estimation itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    learn: LearnArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Generator: 1 for σ over [0.95, 1.05], 2 for σ over [1.9, 2.1].
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    example: u8,
    /// Population counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pops: Vec<usize>,
    /// Samples per population, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Any of sample, nix, nix-unbiased, uni.
    #[arg(long, value_delimiter = ',', default_value = "sample,nix,uni")]
    methods: Vec<String>,
    #[arg(long, value_name = "K")]
    prune_outliers: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write an ε table in CSV.
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    learn: LearnArgs,
}

#[derive(Debug, Args)]
struct BootstrapArgs {
    #[arg(long)]
    input: PathBuf,
    /// Subsample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    subsample: Vec<usize>,
    #[arg(long)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "sample,nix,uni")]
    methods: Vec<String>,
    #[arg(long, value_name = "K")]
    prune_outliers: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    learn: LearnArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_parser = ["nix-likelihood", "uni-likelihood", "map-argmax", "correlation"])]
    suite: String,
    /// Number of random cases; the suite default when omitted.
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                commands::EXIT_USAGE
            } else {
                0
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
