//! Reproduction harness: synthetic generators, the seeded Monte Carlo
//! runner, bootstrap subsampling, error metrics, outlier pruning and the
//! induced-correlation demonstration.

mod benchmark;
mod correlation;
mod metrics;
mod outliers;
mod rng;
mod standin;
mod synthetic;

pub use benchmark::{
    bootstrap_benchmark, run_benchmark, BenchmarkOptions, BenchmarkResult, TrialFailure,
};
pub use correlation::{induced_correlation, monte_carlo_correlation};
pub use metrics::error_report;
pub use outliers::{prune_outliers, Pruned, DEFAULT_PRUNE_K};
pub use rng::trial_rng;
pub use standin::stand_in_dataset;
pub use synthetic::{generate_synthetic, GroundTruth, SyntheticConfig};
