//! Normal-inverse-chi-squared prior: conjugate update, closed-form marginal
//! likelihood, type-II maximum-likelihood learning and posterior modes.
//!
//! Prior: `μ | σ² ~ N(μ0, σ²/κ0)`, `σ² ~ Scale-inv-χ²(ν0, σ0²)`. Everything
//! depends on the data only through `(n, x̄, S)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{self, OptimConfig};
use crate::special::ln_gamma_pos;
use crate::stats::{Method, MomentEstimate, SufficientStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NixHyperparams {
    pub mu0: f64,
    pub kappa0: f64,
    pub nu0: f64,
    pub sigma0_sq: f64,
}

impl NixHyperparams {
    pub fn new(mu0: f64, kappa0: f64, nu0: f64, sigma0_sq: f64) -> Result<Self> {
        let h = Self {
            mu0,
            kappa0,
            nu0,
            sigma0_sq,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.mu0.is_finite()
            && self.kappa0 > 0.0
            && self.nu0 > 0.0
            && self.sigma0_sq > 0.0
            && self.kappa0.is_finite()
            && self.nu0.is_finite()
            && self.sigma0_sq.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "invalid NIX hyperparameters: {self:?}"
            )))
        }
    }

    /// Log density of the prior at `(mu, sigma_sq)`.
    pub fn log_density(&self, mu: f64, sigma_sq: f64) -> f64 {
        if !(sigma_sq > 0.0) {
            return f64::NEG_INFINITY;
        }
        let half = 0.5 * self.nu0;
        let log_norm = 0.5 * (2.0 * PI / self.kappa0).ln() + ln_gamma_pos(half)
            - half * (half * self.sigma0_sq).ln();
        -(half + 1.5) * sigma_sq.ln()
            - (self.nu0 * self.sigma0_sq + self.kappa0 * (mu - self.mu0).powi(2)) / (2.0 * sigma_sq)
            - log_norm
    }
}

/// Posterior hyperparameters after observing one population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NixPosterior {
    pub kappa_n: f64,
    pub mu_n: f64,
    pub nu_n: f64,
    pub sigma_n_sq: f64,
}

impl NixPosterior {
    /// Log of the (unnormalized-free) joint posterior density at `(mu, sigma_sq)`.
    pub fn log_density(&self, mu: f64, sigma_sq: f64) -> f64 {
        NixHyperparams {
            mu0: self.mu_n,
            kappa0: self.kappa_n,
            nu0: self.nu_n,
            sigma0_sq: self.sigma_n_sq,
        }
        .log_density(mu, sigma_sq)
    }
}

/// How the posterior variance mode is turned into a point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VarianceMode {
    /// Joint posterior mode, `ν_n σ_n² / (ν_n + 3)`.
    #[default]
    Biased,
    /// `ν_n σ_n² / (ν_n − 1)`.
    Unbiased,
}

pub fn posterior_update(stats: &SufficientStats, hyper: &NixHyperparams) -> NixPosterior {
    let n = stats.n() as f64;
    let kappa_n = hyper.kappa0 + n;
    let nu_n = hyper.nu0 + n;
    let dev = hyper.mu0 - stats.mean();
    let mu_n = (hyper.kappa0 * hyper.mu0 + n * stats.mean()) / kappa_n;
    let sigma_n_sq =
        (hyper.nu0 * hyper.sigma0_sq + stats.scatter() + hyper.kappa0 * n * dev * dev / kappa_n)
            / nu_n;
    NixPosterior {
        kappa_n,
        mu_n,
        nu_n,
        sigma_n_sq,
    }
}

/// Log marginal likelihood of a single population.
pub fn log_marginal_single(stats: &SufficientStats, hyper: &NixHyperparams) -> f64 {
    let post = posterior_update(stats, hyper);
    let n = stats.n() as f64;
    ln_gamma_pos(0.5 * post.nu_n) - ln_gamma_pos(0.5 * hyper.nu0)
        + 0.5 * (hyper.kappa0 / post.kappa_n).ln()
        + 0.5 * hyper.nu0 * (hyper.nu0 * hyper.sigma0_sq).ln()
        - 0.5 * post.nu_n * (post.nu_n * post.sigma_n_sq).ln()
        - 0.5 * n * PI.ln()
}

/// `ln p(X_1, …, X_P | θ)`, a sum of independent per-population terms.
pub fn log_marginal_likelihood(stats: &[SufficientStats], hyper: &NixHyperparams) -> Result<f64> {
    if stats.is_empty() {
        return Err(Error::Empty(
            "marginal likelihood needs at least one population",
        ));
    }
    hyper.validate()?;
    Ok(stats.iter().map(|s| log_marginal_single(s, hyper)).sum())
}

/// Data-driven starting point: mean of sample means, mean of sample
/// variances, and one pseudo-observation for each of `κ0`, `ν0`.
pub fn initial_hyperparams(stats: &[SufficientStats]) -> Result<NixHyperparams> {
    if stats.is_empty() {
        return Err(Error::Empty("no populations"));
    }
    let p = stats.len() as f64;
    let mu0 = stats.iter().map(SufficientStats::mean).sum::<f64>() / p;
    let mean_var = stats.iter().map(SufficientStats::var_unbiased).sum::<f64>() / p;
    let sigma0_sq = if mean_var > 0.0 {
        mean_var
    } else {
        f64::EPSILON * mu0.abs().max(1.0).powi(2)
    };
    NixHyperparams::new(mu0, 1.0, 1.0, sigma0_sq)
}

/// Options for [`learn_nix`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NixLearnOptions {
    pub optim: OptimConfig,
    /// Upper bound on `κ0` and `ν0` as a multiple of the total number of
    /// observations `Σ n_i`. `None` leaves them unbounded.
    pub pseudo_count_cap: Option<f64>,
}

impl Default for NixLearnOptions {
    fn default() -> Self {
        Self {
            optim: OptimConfig::default(),
            pseudo_count_cap: Some(1.0),
        }
    }
}

impl From<OptimConfig> for NixLearnOptions {
    fn from(optim: OptimConfig) -> Self {
        Self {
            optim,
            ..Self::default()
        }
    }
}

/// Learned hyperparameters with fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NixFit {
    pub hyper: NixHyperparams,
    pub log_likelihood: f64,
    pub initial_log_likelihood: f64,
    pub iterations: usize,
}

struct NixParam {
    log_cap: f64,
}

impl NixParam {
    fn encode(&self, h: &NixHyperparams) -> Vec<f64> {
        vec![h.mu0, h.kappa0.ln(), h.nu0.ln(), h.sigma0_sq.ln()]
    }

    fn decode(&self, x: &[f64]) -> Option<NixHyperparams> {
        let h = NixHyperparams {
            mu0: x[0],
            kappa0: x[1].min(self.log_cap).exp(),
            nu0: x[2].min(self.log_cap).exp(),
            sigma0_sq: x[3].exp(),
        };
        h.validate().ok().map(|_| h)
    }
}

/// Type-II maximum likelihood over `(μ0, ln κ0, ln ν0, ln σ0²)`.
pub fn learn_nix(stats: &[SufficientStats], options: &NixLearnOptions) -> Result<NixFit> {
    if stats.len() < 2 {
        return Err(Error::Empty(
            "learning a prior needs at least two populations",
        ));
    }
    let total: usize = stats.iter().map(SufficientStats::n).sum();
    let param = NixParam {
        log_cap: options
            .pseudo_count_cap
            .map_or(f64::INFINITY, |c| (c * total as f64).ln()),
    };
    let init = initial_hyperparams(stats)?;
    let initial_log_likelihood = log_marginal_likelihood(stats, &init)?;
    let objective = |x: &[f64]| match param.decode(x) {
        Some(h) => {
            let v: f64 = stats.iter().map(|s| log_marginal_single(s, &h)).sum();
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        }
        None => f64::NEG_INFINITY,
    };
    let result =
        optim::maximize(objective, &param.encode(&init), &options.optim)?.into_converged()?;
    let hyper = param
        .decode(&result.point)
        .ok_or_else(|| Error::Domain(format!("optimizer left the domain at {:?}", result.point)))?;
    Ok(NixFit {
        hyper,
        log_likelihood: result.objective,
        initial_log_likelihood,
        iterations: result.iterations,
    })
}

/// Posterior mode for one population.
pub fn nix_map(
    stats: &SufficientStats,
    hyper: &NixHyperparams,
    mode: VarianceMode,
) -> Result<MomentEstimate> {
    hyper.validate()?;
    let post = posterior_update(stats, hyper);
    let scaled = post.nu_n * post.sigma_n_sq;
    let (sigma_sq, method) = match mode {
        VarianceMode::Biased => (scaled / (post.nu_n + 3.0), Method::MpmeNix),
        VarianceMode::Unbiased => {
            if post.nu_n <= 1.0 {
                return Err(Error::Domain(format!(
                    "unbiased variance needs nu_n > 1, got {}",
                    post.nu_n
                )));
            }
            (scaled / (post.nu_n - 1.0), Method::MpmeNixUnbiased)
        }
    };
    MomentEstimate::new(post.mu_n, sigma_sq, method)
}
