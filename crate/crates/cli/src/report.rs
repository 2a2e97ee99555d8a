use std::collections::BTreeMap;

use mpme::experiments::{BenchmarkOptions, BenchmarkResult, GroundTruth, TrialFailure};
use mpme::nix::NixFit;
use mpme::uni::UniFit;
use mpme::{ErrorReport, Method, NixHyperparams, UniHyperparams};
use serde::Serialize;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Header {
    pub schema: &'static str,
    pub kind: &'static str,
    pub tool_version: &'static str,
    pub seed: u64,
}

impl Header {
    pub fn new(kind: &'static str, seed: u64) -> Self {
        Self {
            schema: mpme::io::SCHEMA,
            kind,
            tool_version: TOOL_VERSION,
            seed,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EstimateConfig {
    pub input: String,
    pub prior: &'static str,
    pub unbiased_variance: bool,
    pub prune_outliers: Option<f64>,
    pub options: BenchmarkOptions,
}

#[derive(Debug, Serialize)]
pub struct PopulationEstimate {
    pub id: String,
    pub n: usize,
    pub sample_mean: f64,
    pub sample_var: f64,
    pub mu: f64,
    pub sigma_sq: f64,
    pub method: Method,
    pub pruned: bool,
}

#[derive(Debug, Serialize)]
pub struct LearnedPrior {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nix: Option<NixFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uni: Option<UniFit>,
}

#[derive(Debug, Serialize)]
pub struct EstimateReport {
    #[serde(flatten)]
    pub header: Header,
    pub config: EstimateConfig,
    pub populations: Vec<PopulationEstimate>,
    pub hyperparameters: LearnedPrior,
    pub failed: usize,
}

#[derive(Debug, Serialize)]
pub struct LearnedSummary {
    pub mean_kappa0: Option<f64>,
    pub mean_nu0: Option<f64>,
    pub nix: Vec<Option<NixHyperparams>>,
    pub uni: Vec<Option<UniHyperparams>>,
}

/// One `(P, N)` point of a sweep.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub populations: usize,
    pub samples_per_population: usize,
    pub trials: usize,
    pub failed_trials: usize,
    pub failures: Vec<TrialFailure>,
    pub pruned_populations: usize,
    pub truth: GroundTruth,
    pub errors: BTreeMap<Method, ErrorReport>,
    pub learned: LearnedSummary,
}

impl RunReport {
    pub fn new(populations: usize, samples: usize, result: BenchmarkResult) -> Self {
        let mean =
            |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
        let fitted: Vec<&NixHyperparams> = result.nix_hyper.iter().flatten().collect();
        Self {
            populations,
            samples_per_population: samples,
            trials: result.trials,
            failed_trials: result.failures.len(),
            pruned_populations: result.pruned_populations,
            learned: LearnedSummary {
                mean_kappa0: mean(fitted.iter().map(|h| h.kappa0).collect()),
                mean_nu0: mean(fitted.iter().map(|h| h.nu0).collect()),
                nix: result.nix_hyper,
                uni: result.uni_hyper,
            },
            failures: result.failures,
            truth: result.truth,
            errors: result.reports,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SynthConfig {
    pub example: u8,
    pub mu_range: (f64, f64),
    pub sigma_range: (f64, f64),
    pub populations: Vec<usize>,
    pub samples_per_population: Vec<usize>,
    pub trials: usize,
    pub options: BenchmarkOptions,
}

#[derive(Debug, Serialize)]
pub struct BootstrapConfig {
    pub input: String,
    pub subsample: Vec<usize>,
    pub trials: usize,
    pub options: BenchmarkOptions,
}

#[derive(Debug, Serialize)]
pub struct SweepReport<C> {
    #[serde(flatten)]
    pub header: Header,
    pub config: C,
    pub runs: Vec<RunReport>,
}

/// Plot-ready ε table, one row per run and method.
pub fn sweep_table(runs: &[RunReport]) -> String {
    let mut out = String::from(
        "populations,samples_per_population,method,eps_mu,eps_sigma_sq,trials,failed_trials\n",
    );
    for run in runs {
        for (method, e) in &run.errors {
            out.push_str(&format!(
                "{},{},{},{:.16e},{:.16e},{},{}\n",
                run.populations,
                run.samples_per_population,
                method,
                e.eps_mu,
                e.eps_sigma_sq,
                e.trials,
                run.failed_trials
            ));
        }
    }
    out
}
