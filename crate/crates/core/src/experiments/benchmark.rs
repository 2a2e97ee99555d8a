use std::collections::BTreeMap;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::error_report;
use super::outliers::prune_outliers;
use super::rng::{trial_rng, STREAM_BOOTSTRAP};
use super::synthetic::{generate_synthetic, GroundTruth, SyntheticConfig};
use crate::error::{Error, Result};
use crate::estimators::sample_estimate;
use crate::nix::{learn_nix, nix_map, NixHyperparams, NixLearnOptions, VarianceMode};
use crate::special::QuadratureConfig;
use crate::stats::{ErrorReport, Method, MomentEstimate, PopulationSample, SufficientStats};
use crate::uni::{learn_uni, uni_map, UniHyperparams, UniLearnOptions, UniVariance};

/// Largest tolerated fraction of failed trials.
const MAX_FAILURE_FRACTION: f64 = 0.05;

/// Everything a benchmark run needs besides the data source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOptions {
    pub methods: Vec<Method>,
    pub nix: NixLearnOptions,
    pub uni: UniLearnOptions,
    pub quadrature: QuadratureConfig,
    pub uni_variance: UniVariance,
    /// MAD threshold for outlier pruning before prior learning; off when `None`.
    /// Pruned populations keep their sample estimates.
    pub prune: Option<f64>,
}

impl BenchmarkOptions {
    pub fn new(methods: Vec<Method>) -> Self {
        Self {
            methods,
            nix: NixLearnOptions::default(),
            uni: UniLearnOptions::default(),
            quadrature: QuadratureConfig::default(),
            uni_variance: UniVariance::default(),
            prune: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config(String::from("no methods selected")));
        }
        if let Some(m) = self
            .methods
            .iter()
            .find(|m| matches!(m, Method::PooledMean | Method::PooledVar))
        {
            return Err(Error::Config(format!("{m} is not a benchmark method")));
        }
        self.nix.optim.validate()?;
        self.uni.optim.validate()?;
        self.quadrature.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub message: String,
}

/// Aggregated errors plus per-trial learned priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub reports: BTreeMap<Method, ErrorReport>,
    pub truth: GroundTruth,
    pub trials: usize,
    pub failures: Vec<TrialFailure>,
    /// Indexed by trial; `None` for failed trials or when NIX was not run.
    pub nix_hyper: Vec<Option<NixHyperparams>>,
    pub uni_hyper: Vec<Option<UniHyperparams>>,
    pub pruned_populations: usize,
}

impl BenchmarkResult {
    pub fn report(&self, method: Method) -> Option<&ErrorReport> {
        self.reports.get(&method)
    }
}

struct TrialOutput {
    estimates: BTreeMap<Method, Vec<MomentEstimate>>,
    nix: Option<NixHyperparams>,
    uni: Option<UniHyperparams>,
    pruned: usize,
}

fn run_trial(stats: &[SufficientStats], options: &BenchmarkOptions) -> Result<TrialOutput> {
    let (learn_idx, pruned) = match options.prune {
        Some(k) => {
            let p = prune_outliers(stats, k)?;
            (p.kept, p.removed.len())
        }
        None => ((0..stats.len()).collect(), 0),
    };
    let learn_set: Vec<SufficientStats> = learn_idx.iter().map(|&i| stats[i]).collect();
    let in_learn_set = |i: usize| learn_idx.binary_search(&i).is_ok();

    let wants = |m: Method| options.methods.contains(&m);
    let nix = if wants(Method::MpmeNix) || wants(Method::MpmeNixUnbiased) {
        Some(learn_nix(&learn_set, &options.nix)?.hyper)
    } else {
        None
    };
    let uni = if wants(Method::MpmeUni) {
        Some(learn_uni(&learn_set, &options.uni, &options.quadrature)?.hyper)
    } else {
        None
    };

    let mut estimates = BTreeMap::new();
    for &method in &options.methods {
        let row = stats
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if method == Method::SampleEst || !in_learn_set(i) {
                    return Ok(sample_estimate(s));
                }
                match method {
                    Method::MpmeNix => {
                        nix_map(s, nix.as_ref().expect("learned"), VarianceMode::Biased)
                    }
                    Method::MpmeNixUnbiased => {
                        nix_map(s, nix.as_ref().expect("learned"), VarianceMode::Unbiased)
                    }
                    Method::MpmeUni => {
                        uni_map(s, uni.as_ref().expect("learned"), options.uni_variance)
                    }
                    _ => unreachable!("rejected by validate"),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        estimates.insert(method, row);
    }
    Ok(TrialOutput {
        estimates,
        nix,
        uni,
        pruned,
    })
}

fn aggregate(
    outputs: Vec<Result<TrialOutput>>,
    truth: GroundTruth,
    options: &BenchmarkOptions,
) -> Result<BenchmarkResult> {
    let trials = outputs.len();
    let mut failures = Vec::new();
    let mut rows: BTreeMap<Method, Vec<Vec<MomentEstimate>>> =
        options.methods.iter().map(|&m| (m, Vec::new())).collect();
    let mut nix_hyper = Vec::with_capacity(trials);
    let mut uni_hyper = Vec::with_capacity(trials);
    let mut pruned_populations = 0;
    for (trial, output) in outputs.into_iter().enumerate() {
        match output {
            Ok(out) => {
                for (method, row) in out.estimates {
                    rows.get_mut(&method).expect("requested").push(row);
                }
                nix_hyper.push(out.nix);
                uni_hyper.push(out.uni);
                pruned_populations += out.pruned;
            }
            Err(e) => {
                failures.push(TrialFailure {
                    trial,
                    message: e.to_string(),
                });
                nix_hyper.push(None);
                uni_hyper.push(None);
            }
        }
    }
    if failures.len() as f64 > MAX_FAILURE_FRACTION * trials as f64 || failures.len() == trials {
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            trials,
            first: failures[0].message.clone(),
        });
    }
    let reports = rows
        .into_iter()
        .map(|(m, r)| error_report(&r, &truth).map(|rep| (m, rep)))
        .collect::<Result<_>>()?;
    Ok(BenchmarkResult {
        reports,
        truth,
        trials,
        failures,
        nix_hyper,
        uni_hyper,
        pruned_populations,
    })
}

/// Seeded Monte Carlo comparison on a synthetic generator.
///
/// Trials run on the current rayon pool and are reduced in trial order, so the
/// result does not depend on the number of threads.
pub fn run_benchmark(cfg: &SyntheticConfig, options: &BenchmarkOptions) -> Result<BenchmarkResult> {
    options.validate()?;
    let truth = cfg.ground_truth()?;
    let outputs: Vec<Result<TrialOutput>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let (_, samples) = generate_synthetic(cfg, t)?;
            let stats = samples
                .iter()
                .map(SufficientStats::from_sample)
                .collect::<Result<Vec<_>>>()?;
            run_trial(&stats, options)
        })
        .collect();
    aggregate(outputs, truth, options)
}

/// Subsampling benchmark on a fixed dataset whose full-sample moments serve
/// as ground truth. Each trial draws `n_sub` values per population without
/// replacement, keeping the original order of the drawn values.
pub fn bootstrap_benchmark(
    dataset: &[PopulationSample],
    n_sub: usize,
    trials: usize,
    seed: u64,
    options: &BenchmarkOptions,
) -> Result<BenchmarkResult> {
    options.validate()?;
    if dataset.is_empty() {
        return Err(Error::Empty("bootstrap needs at least one population"));
    }
    if n_sub < 2 || trials == 0 {
        return Err(Error::Config(format!(
            "need subsample size >= 2 and at least one trial, got {n_sub} and {trials}"
        )));
    }
    if let Some(p) = dataset.iter().find(|p| p.values.len() < n_sub) {
        return Err(Error::Config(format!(
            "subsample size {n_sub} exceeds the {} values of population `{}`",
            p.values.len(),
            p.id
        )));
    }
    let full = dataset
        .iter()
        .map(SufficientStats::from_sample)
        .collect::<Result<Vec<_>>>()?;
    let truth = GroundTruth {
        mu: full.iter().map(SufficientStats::mean).collect(),
        sigma_sq: full.iter().map(SufficientStats::var_unbiased).collect(),
    };
    let outputs: Vec<Result<TrialOutput>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let stats = dataset
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut rng = trial_rng(seed, t as u64, i as u64, STREAM_BOOTSTRAP);
                    let mut picked = index::sample(&mut rng, p.values.len(), n_sub).into_vec();
                    picked.sort_unstable();
                    let values: Vec<f64> = picked.iter().map(|&j| p.values[j]).collect();
                    SufficientStats::from_values(&values)
                })
                .collect::<Result<Vec<_>>>()?;
            run_trial(&stats, options)
        })
        .collect();
    aggregate(outputs, truth, options)
}
