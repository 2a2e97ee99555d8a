use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use mpme::experiments::{
    bootstrap_benchmark, prune_outliers, run_benchmark, BenchmarkOptions, SyntheticConfig,
};
use mpme::io::{load_dataset, write_json, DatasetFormat};
use mpme::nix::{learn_nix, nix_map, NixLearnOptions};
use mpme::uni::{learn_uni, uni_map, UniLearnOptions};
use mpme::verify::Suite;
use mpme::{sample_estimate, Method, OptimConfig, SufficientStats, VarianceMode};
use serde::Serialize;

use crate::report::{
    sweep_table, BootstrapConfig, EstimateConfig, EstimateReport, Header, LearnedPrior,
    PopulationEstimate, RunReport, SweepReport, SynthConfig,
};
use crate::{BootstrapArgs, Cli, Command, EstimateArgs, LearnArgs, Prior, SynthArgs, VerifyArgs};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(mpme::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(mpme::Error::Config(_)) => EXIT_USAGE,
            CliError::Core(e) if e.is_numerical() || matches!(e, mpme::Error::Domain(_)) => {
                EXIT_NUMERICAL
            }
            CliError::Core(_) => EXIT_DATA,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl From<mpme::Error> for CliError {
    fn from(e: mpme::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<u8> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| {
            CliError::Usage(format!("cannot start {} worker threads: {e}", cli.threads))
        })?;
    pool.install(|| match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Synth(a) => synth(a),
        Command::Bootstrap(a) => bootstrap(a),
        Command::Verify(a) => verify(a),
    })
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> CliResult<()> {
    let mut buf = Vec::new();
    write_json(&mut buf, value)?;
    match output {
        Some(p) => {
            fs::write(p, buf).map_err(|e| mpme::Error::Io(format!("{}: {e}", p.display())))?
        }
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(mpme::Error::from)?,
    }
    Ok(())
}

fn write_table(path: &Path, body: &str) -> CliResult<()> {
    fs::write(path, body).map_err(|e| mpme::Error::Io(format!("{}: {e}", path.display())).into())
}

fn benchmark_options(
    methods: Vec<Method>,
    learn: &LearnArgs,
    prune: Option<f64>,
) -> CliResult<BenchmarkOptions> {
    if learn.max_iters == 0 {
        return Err(CliError::Usage(String::from(
            "--max-iters must be positive",
        )));
    }
    if let Some(k) = prune.filter(|k| k.is_nan() || *k <= 0.0) {
        return Err(CliError::Usage(format!(
            "--prune-outliers must be positive, got {k}"
        )));
    }
    let optim = OptimConfig {
        max_iters: learn.max_iters,
        ..OptimConfig::default()
    };
    let cap = if learn.no_pseudo_count_cap {
        None
    } else if learn.pseudo_count_cap > 0.0 {
        Some(learn.pseudo_count_cap)
    } else {
        return Err(CliError::Usage(String::from(
            "--pseudo-count-cap must be positive",
        )));
    };
    let mut options = BenchmarkOptions::new(methods);
    options.nix = NixLearnOptions {
        optim,
        pseudo_count_cap: cap,
    };
    options.uni = UniLearnOptions {
        optim,
        ..UniLearnOptions::default()
    };
    options.uni_variance = learn.uni_variance.into();
    options.prune = prune;
    Ok(options)
}

fn parse_methods(names: &[String]) -> CliResult<Vec<Method>> {
    let mut out = Vec::new();
    for name in names {
        let m = match name.trim() {
            "sample" => Method::SampleEst,
            "nix" => Method::MpmeNix,
            "nix-unbiased" => Method::MpmeNixUnbiased,
            "uni" => Method::MpmeUni,
            other => return Err(CliError::Usage(format!("unknown method `{other}`"))),
        };
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

fn stats_of(data: &mpme::io::DatasetFile) -> CliResult<Vec<SufficientStats>> {
    Ok(data
        .populations
        .iter()
        .map(SufficientStats::from_sample)
        .collect::<mpme::Result<Vec<_>>>()?)
}

fn estimate(a: EstimateArgs) -> CliResult<u8> {
    let data = load_dataset(&a.input, DatasetFormat::from_path(&a.input))?;
    let stats = stats_of(&data)?;
    let method = match a.prior {
        Prior::Nix if a.unbiased_variance => Method::MpmeNixUnbiased,
        Prior::Nix => Method::MpmeNix,
        Prior::Uni => Method::MpmeUni,
        Prior::Sample => Method::SampleEst,
    };
    let options = benchmark_options(vec![method], &a.learn, a.prune_outliers)?;
    let kept: Vec<usize> = match (a.prune_outliers, a.prior) {
        (Some(k), Prior::Nix | Prior::Uni) => {
            let p = prune_outliers(&stats, k)?;
            for &i in &p.removed {
                eprintln!("pruned population `{}`", data.populations[i].id);
            }
            p.kept
        }
        _ => (0..stats.len()).collect(),
    };
    let learn_set: Vec<SufficientStats> = kept.iter().map(|&i| stats[i]).collect();
    let mut learned = LearnedPrior {
        nix: None,
        uni: None,
    };
    match a.prior {
        Prior::Nix => learned.nix = Some(learn_nix(&learn_set, &options.nix)?),
        Prior::Uni => learned.uni = Some(learn_uni(&learn_set, &options.uni, &options.quadrature)?),
        Prior::Sample => {}
    }
    let mode = if a.unbiased_variance {
        VarianceMode::Unbiased
    } else {
        VarianceMode::Biased
    };
    let mut populations = Vec::with_capacity(stats.len());
    for (i, (s, p)) in stats.iter().zip(&data.populations).enumerate() {
        let pruned = !kept.contains(&i);
        let e = match (&learned, pruned) {
            (LearnedPrior { nix: Some(fit), .. }, false) => nix_map(s, &fit.hyper, mode)?,
            (LearnedPrior { uni: Some(fit), .. }, false) => {
                uni_map(s, &fit.hyper, options.uni_variance)?
            }
            _ => sample_estimate(s),
        };
        populations.push(PopulationEstimate {
            id: p.id.clone(),
            n: s.n(),
            sample_mean: s.mean(),
            sample_var: s.var_unbiased(),
            mu: e.mu,
            sigma_sq: e.sigma_sq,
            method: e.method,
            pruned,
        });
    }
    let prior = match a.prior {
        Prior::Nix => "nix",
        Prior::Uni => "uni",
        Prior::Sample => "sample",
    };
    let report = EstimateReport {
        header: Header::new("estimate", a.seed),
        config: EstimateConfig {
            input: a.input.display().to_string(),
            prior,
            unbiased_variance: a.unbiased_variance,
            prune_outliers: a.prune_outliers,
            options,
        },
        populations,
        hyperparameters: learned,
        failed: 0,
    };
    emit(&report, a.output.as_deref())?;
    Ok(0)
}

fn synth(a: SynthArgs) -> CliResult<u8> {
    let methods = parse_methods(&a.methods)?;
    let options = benchmark_options(methods, &a.learn, a.prune_outliers)?;
    let template = match a.example {
        1 => SyntheticConfig::example1(1, 2, a.trials, a.seed),
        _ => SyntheticConfig::example2(1, 2, a.trials, a.seed),
    };
    let mut runs = Vec::new();
    for &n in &a.n {
        for &p in &a.pops {
            let cfg = SyntheticConfig {
                populations: p,
                samples_per_population: n,
                ..template.clone()
            };
            let result = run_benchmark(&cfg, &options)?;
            for f in &result.failures {
                eprintln!("P={p} N={n}: trial {} failed: {}", f.trial, f.message);
            }
            runs.push(RunReport::new(p, n, result));
        }
    }
    let report = SweepReport {
        header: Header::new("synth", a.seed),
        config: SynthConfig {
            example: a.example,
            mu_range: template.mu_range,
            sigma_range: template.sigma_range,
            populations: a.pops,
            samples_per_population: a.n,
            trials: a.trials,
            options,
        },
        runs,
    };
    if let Some(t) = &a.table {
        write_table(t, &sweep_table(&report.runs))?;
    }
    emit(&report, a.output.as_deref())?;
    Ok(0)
}

fn bootstrap(a: BootstrapArgs) -> CliResult<u8> {
    let methods = parse_methods(&a.methods)?;
    let options = benchmark_options(methods, &a.learn, a.prune_outliers)?;
    let data = load_dataset(&a.input, DatasetFormat::from_path(&a.input))?;
    let mut runs = Vec::new();
    for &n_sub in &a.subsample {
        let result = bootstrap_benchmark(&data.populations, n_sub, a.trials, a.seed, &options)?;
        for f in &result.failures {
            eprintln!("subsample {n_sub}: trial {} failed: {}", f.trial, f.message);
        }
        runs.push(RunReport::new(data.populations.len(), n_sub, result));
    }
    let report = SweepReport {
        header: Header::new("bootstrap", a.seed),
        config: BootstrapConfig {
            input: a.input.display().to_string(),
            subsample: a.subsample,
            trials: a.trials,
            options,
        },
        runs,
    };
    if let Some(t) = &a.table {
        write_table(t, &sweep_table(&report.runs))?;
    }
    emit(&report, a.output.as_deref())?;
    Ok(0)
}

fn verify(a: VerifyArgs) -> CliResult<u8> {
    let suite: Suite = a.suite.parse()?;
    let cases = a.cases.unwrap_or_else(|| suite.default_cases());
    if cases == 0 {
        return Err(CliError::Usage(String::from("--cases must be positive")));
    }
    let report = suite.run(cases, a.seed)?;
    for c in &report.cases {
        let tag = if c.passed { "ok  " } else { "FAIL" };
        println!(
            "{tag} {} deviation {:.3e} (tolerance {:.0e})",
            c.label, c.deviation, c.tolerance
        );
    }
    println!(
        "{suite}: {} of {} cases within tolerance, max deviation {:.3e}",
        report.cases.len() - report.failures(),
        report.cases.len(),
        report.max_deviation()
    );
    Ok(if report.passed() { 0 } else { EXIT_VERIFY })
}
