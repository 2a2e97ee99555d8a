//! Randomized oracle cross-checks with fixed tolerances.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    grid_cell, grid_map_argmax, nix_log_posterior, nix_marginal_grid, numeric_log_marginal,
    uni_log_marginal_owen, uni_log_posterior, MarginalGrid,
};
use crate::error::{Error, Result};
use crate::experiments::{induced_correlation, monte_carlo_correlation};
use crate::nix::{self, nix_map, NixHyperparams, VarianceMode};
use crate::special::QuadratureConfig;
use crate::stats::SufficientStats;
use crate::uni::{self, uni_map, UniHyperparams, UniVariance};

pub const NIX_LIKELIHOOD_TOL: f64 = 1e-6;
pub const UNI_LIKELIHOOD_TOL: f64 = 1e-5;
pub const CORRELATION_TOL: f64 = 0.005;
const NIX_GRID_NODES: usize = 2000;
const UNI_GRID_NODES: usize = 2000;
const ARGMAX_NODES: usize = 401;
const CORRELATION_DRAWS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    NixLikelihood,
    UniLikelihood,
    MapArgmax,
    Correlation,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::NixLikelihood => "nix-likelihood",
            Suite::UniLikelihood => "uni-likelihood",
            Suite::MapArgmax => "map-argmax",
            Suite::Correlation => "correlation",
        }
    }

    pub fn default_cases(&self) -> usize {
        match self {
            Suite::NixLikelihood => 50,
            Suite::UniLikelihood | Suite::MapArgmax => 20,
            Suite::Correlation => 3,
        }
    }

    pub fn run(&self, cases: usize, seed: u64) -> Result<SuiteReport> {
        match self {
            Suite::NixLikelihood => nix_likelihood_suite(cases, seed),
            Suite::UniLikelihood => uni_likelihood_suite(cases, seed),
            Suite::MapArgmax => map_argmax_suite(cases, seed),
            Suite::Correlation => correlation_suite(cases, seed),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Suite::NixLikelihood,
            Suite::UniLikelihood,
            Suite::MapArgmax,
            Suite::Correlation,
        ]
        .into_iter()
        .find(|v| v.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// One comparison: `deviation` must not exceed `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub label: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CaseResult {
    fn new(label: String, deviation: f64, tolerance: f64) -> Self {
        Self {
            label,
            deviation,
            tolerance,
            passed: deviation <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub cases: Vec<CaseResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !c.passed).count()
    }

    pub fn max_deviation(&self) -> f64 {
        self.cases.iter().map(|c| c.deviation).fold(0.0, f64::max)
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn relative_gap(log_a: f64, log_b: f64) -> f64 {
    (log_a - log_b).exp_m1().abs()
}

/// Closed-form NIX marginal against the dense `(z, ln σ²)` grid.
pub fn nix_likelihood_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(cases);
    for k in 0..cases {
        let n = rng.random_range(2..=8usize);
        let h = NixHyperparams::new(
            rng.random_range(-5.0..5.0),
            log_uniform(&mut rng, 0.1, 10.0),
            log_uniform(&mut rng, 0.1, 10.0),
            log_uniform(&mut rng, 0.1, 10.0),
        )?;
        let s = SufficientStats::new(
            n,
            h.mu0 + rng.random_range(-3.0..3.0),
            log_uniform(&mut rng, 0.1, 10.0),
        )?;
        let closed = nix::log_marginal_single(&s, &h);
        let dense = numeric_log_marginal(
            &s,
            |m, v| h.log_density(m, v),
            &nix_marginal_grid(&s, &h, NIX_GRID_NODES),
        )?;
        out.push(CaseResult::new(
            format!(
                "case {k}: n={n} {h:?} mean={:.4} var={:.4}",
                s.mean(),
                s.var_unbiased()
            ),
            relative_gap(closed, dense),
            NIX_LIKELIHOOD_TOL,
        ));
    }
    Ok(SuiteReport {
        suite: Suite::NixLikelihood,
        seed,
        cases: out,
    })
}

fn random_uni_case(
    rng: &mut ChaCha8Rng,
    min_n: usize,
) -> Result<(SufficientStats, UniHyperparams)> {
    let n = rng.random_range(min_n..=10usize);
    let mean = rng.random_range(-5.0..5.0);
    let var = log_uniform(rng, 0.1, 10.0);
    let sd = (var / n as f64).sqrt();
    let a = mean + rng.random_range(-3.0..1.0) * sd;
    let b = a + log_uniform(rng, 0.5, 6.0) * sd;
    let c = var * log_uniform(rng, 0.2, 1.5);
    let d = c + var * log_uniform(rng, 0.1, 3.0);
    Ok((
        SufficientStats::new(n, mean, var)?,
        UniHyperparams::new(a, b, c, d)?,
    ))
}

/// UNI quadrature path against the `Q_f` form and the dense `(μ, σ²)` grid.
pub fn uni_likelihood_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = QuadratureConfig::default();
    let mut out = Vec::with_capacity(2 * cases);
    for k in 0..cases {
        let (s, h) = random_uni_case(&mut rng, 4)?;
        let quad = uni::log_marginal_single(&s, &h, &cfg)?;
        let owen = uni_log_marginal_owen(&s, &h, &cfg)?;
        let grid = MarginalGrid::Box {
            mu: (h.a, h.b),
            sigma_sq: (h.c, h.d),
            nodes: UNI_GRID_NODES,
        };
        let dense = numeric_log_marginal(&s, |m, v| h.log_density(m, v), &grid)?;
        let label = format!(
            "case {k}: n={} {h:?} mean={:.4} var={:.4}",
            s.n(),
            s.mean(),
            s.var_unbiased()
        );
        out.push(CaseResult::new(
            format!("{label} vs Q_f"),
            relative_gap(quad, owen),
            UNI_LIKELIHOOD_TOL,
        ));
        out.push(CaseResult::new(
            format!("{label} vs grid"),
            relative_gap(quad, dense),
            UNI_LIKELIHOOD_TOL,
        ));
    }
    Ok(SuiteReport {
        suite: Suite::UniLikelihood,
        seed,
        cases: out,
    })
}

fn cell_distance(est: (f64, f64), grid: (f64, f64), cell: (f64, f64)) -> f64 {
    ((est.0 - grid.0).abs() / cell.0).max((est.1 - grid.1).abs() / cell.1)
}

/// Closed-form posterior modes against a grid search of the exact log
/// posterior. The deviation is measured in grid cells and may not exceed one.
pub fn map_argmax_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * cases);
    for k in 0..cases {
        let n = rng.random_range(2..=8usize);
        let h = NixHyperparams::new(
            rng.random_range(-5.0..5.0),
            log_uniform(&mut rng, 0.1, 10.0),
            log_uniform(&mut rng, 0.1, 10.0),
            log_uniform(&mut rng, 0.1, 10.0),
        )?;
        let s = SufficientStats::new(
            n,
            h.mu0 + rng.random_range(-3.0..3.0),
            log_uniform(&mut rng, 0.1, 10.0),
        )?;
        let e = nix_map(&s, &h, VarianceMode::Biased)?;
        let post = nix::posterior_update(&s, &h);
        let half = 4.0 * (e.sigma_sq / post.kappa_n).sqrt();
        let mu_w = (e.mu - half, e.mu + half);
        let var_w = (0.4 * e.sigma_sq, 2.5 * e.sigma_sq);
        let g = grid_map_argmax(
            |m, v| nix_log_posterior(&s, &h, m, v),
            mu_w,
            var_w,
            ARGMAX_NODES,
        )?;
        let dev = cell_distance((e.mu, e.sigma_sq), g, grid_cell(mu_w, var_w, ARGMAX_NODES));
        out.push(CaseResult::new(
            format!("nix case {k}: n={n} {h:?}"),
            dev,
            1.0,
        ));
    }
    for k in 0..cases {
        let (s, h) = random_uni_case(&mut rng, 2)?;
        // The grid maximizes the joint posterior, whose variance coordinate is
        // the box-constrained likelihood maximizer.
        let e = uni_map(&s, &h, UniVariance::Mle)?;
        // Box edges sit on grid nodes (300 of the 400 intervals span the
        // box) so a clamped mode is representable. The oracle box is widened
        // by a millionth of a cell to absorb rounding in the node positions.
        let hm = (h.b - h.a) / 300.0;
        let hv = (h.d - h.c) / 300.0;
        let mu_w = (h.a - 50.0 * hm, h.b + 50.0 * hm);
        let below = (0.5 * h.c / hv).floor().clamp(1.0, 50.0);
        let var_w = (h.c - below * hv, h.d + (100.0 - below) * hv);
        let oracle_box = UniHyperparams {
            a: h.a - 1e-6 * hm,
            b: h.b + 1e-6 * hm,
            c: h.c - 1e-6 * hv,
            d: h.d + 1e-6 * hv,
        };
        let g = grid_map_argmax(
            |m, v| uni_log_posterior(&s, &oracle_box, m, v),
            mu_w,
            var_w,
            ARGMAX_NODES,
        )?;
        let dev = cell_distance((e.mu, e.sigma_sq), g, grid_cell(mu_w, var_w, ARGMAX_NODES));
        out.push(CaseResult::new(
            format!("uni case {k}: n={} {h:?}", s.n()),
            dev,
            1.0,
        ));
    }
    Ok(SuiteReport {
        suite: Suite::MapArgmax,
        seed,
        cases: out,
    })
}

/// Monte Carlo correlation of two children of a shared Gaussian parent.
/// The first case is `(σ, σ0) = (1, 2)`; further cases cycle other pairs.
pub fn correlation_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    const PAIRS: [(f64, f64); 4] = [(1.0, 2.0), (1.0, 1.0), (2.0, 1.0), (0.5, 3.0)];
    let mut out = Vec::with_capacity(cases);
    for k in 0..cases {
        let (sigma, sigma0) = PAIRS[k % PAIRS.len()];
        let analytic = induced_correlation(sigma, sigma0)?;
        let mc = monte_carlo_correlation(
            sigma,
            sigma0,
            CORRELATION_DRAWS,
            seed.wrapping_add(k as u64),
        )?;
        out.push(CaseResult::new(
            format!("sigma={sigma} sigma0={sigma0}: analytic {analytic:.6}, monte carlo {mc:.6}"),
            (mc - analytic).abs(),
            CORRELATION_TOL,
        ));
    }
    Ok(SuiteReport {
        suite: Suite::Correlation,
        seed,
        cases: out,
    })
}
