//! Independent uniform prior: `μ ~ U[a, b]`, `σ² ~ U[c, d]`.
//!
//! The μ-integral of the marginal likelihood is a difference of normal
//! CDFs; the remaining σ² integral is done by adaptive quadrature in
//! `ln σ²`, which covers every `n >= 2`. Posterior modes clamp the sample
//! estimates into the learned box.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{self, OptimConfig};
use crate::special::{integrate, ln_normal_cdf_diff, QuadratureConfig};
use crate::stats::{Method, MomentEstimate, SufficientStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniHyperparams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl UniHyperparams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let h = Self { a, b, c, d };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.c, self.d]
            .iter()
            .all(|v| v.is_finite());
        if finite && self.a < self.b && 0.0 < self.c && self.c < self.d {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "invalid UNI hyperparameters: {self:?}"
            )))
        }
    }

    pub fn log_volume(&self) -> f64 {
        ((self.b - self.a) * (self.d - self.c)).ln()
    }

    /// Log prior density at `(mu, sigma_sq)`; `-inf` outside the box.
    pub fn log_density(&self, mu: f64, sigma_sq: f64) -> f64 {
        if (self.a..=self.b).contains(&mu) && (self.c..=self.d).contains(&sigma_sq) {
            -self.log_volume()
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Log marginal likelihood with an underflow flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniMarginal {
    pub log_likelihood: f64,
    /// Set when some population's integral was numerically zero, in which
    /// case `log_likelihood` is `-inf`.
    pub underflow: bool,
}

/// Log marginal likelihood of one population.
pub fn log_marginal_single(
    stats: &SufficientStats,
    hyper: &UniHyperparams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let n = stats.n() as f64;
    let scatter = stats.scatter();
    let sqrt_n = n.sqrt();
    let (lo_off, hi_off) = (
        (hyper.a - stats.mean()) * sqrt_n,
        (hyper.b - stats.mean()) * sqrt_n,
    );
    let (uc, ud) = (hyper.c.ln(), hyper.d.ln());

    // Power/exponential part in u = ln σ², including the Jacobian e^u.
    let base = |u: f64| -0.5 * (n - 3.0) * u - 0.5 * scatter * (-u).exp();
    // Its maximum over [uc, ud] is used as the scale offset.
    let mut offset = base(uc).max(base(ud));
    if n > 3.0 && scatter > 0.0 {
        let peak = (scatter / (n - 3.0)).ln();
        if peak > uc && peak < ud {
            offset = offset.max(base(peak));
        }
    }
    let integrand = |u: f64| {
        let sigma = (0.5 * u).exp();
        let log_phi = ln_normal_cdf_diff(lo_off / sigma, hi_off / sigma);
        (base(u) - offset + log_phi).exp()
    };
    let integral = integrate(integrand, uc, ud, cfg)?;
    let log_const = -0.5 * (n - 1.0) * (2.0 * PI).ln() - 0.5 * n.ln() - hyper.log_volume();
    if integral.value > 0.0 {
        Ok(log_const + offset + integral.value.ln())
    } else {
        Ok(f64::NEG_INFINITY)
    }
}

/// `ln p(X_1, …, X_P | a, b, c, d)`.
pub fn log_marginal_likelihood(
    stats: &[SufficientStats],
    hyper: &UniHyperparams,
    cfg: &QuadratureConfig,
) -> Result<UniMarginal> {
    if stats.is_empty() {
        return Err(Error::Empty(
            "marginal likelihood needs at least one population",
        ));
    }
    hyper.validate()?;
    cfg.validate()?;
    let mut total = 0.0;
    for s in stats {
        let term = log_marginal_single(s, hyper, cfg)?;
        if term == f64::NEG_INFINITY {
            return Ok(UniMarginal {
                log_likelihood: f64::NEG_INFINITY,
                underflow: true,
            });
        }
        total += term;
    }
    Ok(UniMarginal {
        log_likelihood: total,
        underflow: false,
    })
}

/// Starting box: the range of sample means and the range of sample variances.
pub fn initial_hyperparams(stats: &[SufficientStats]) -> Result<UniHyperparams> {
    if stats.is_empty() {
        return Err(Error::Empty("no populations"));
    }
    let (scale_mu, scale_var) = data_scales(stats);
    let (mut lo, mut hi) = min_max(stats.iter().map(SufficientStats::mean));
    let se = stats
        .iter()
        .map(|s| (s.var_unbiased() / s.n() as f64).sqrt())
        .fold(0.0, f64::max);
    if hi - lo < se {
        let mid = 0.5 * (lo + hi);
        lo = mid - 0.5 * se.max(scale_mu * 1e-3);
        hi = mid + 0.5 * se.max(scale_mu * 1e-3);
    }
    let (smin, smax) = min_max(stats.iter().map(SufficientStats::var_unbiased));
    let c = smin.max(1e-3 * scale_var);
    let d = smax.max(2.0 * c);
    UniHyperparams::new(lo, hi, c, d)
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// Scales used for the degeneracy check: pooled standard deviation for the
/// mean axis and pooled variance for the variance axis.
fn data_scales(stats: &[SufficientStats]) -> (f64, f64) {
    let p = stats.len() as f64;
    let mean_var = stats.iter().map(SufficientStats::var_unbiased).sum::<f64>() / p;
    if mean_var > 0.0 {
        (mean_var.sqrt(), mean_var)
    } else {
        let m = stats.iter().map(|s| s.mean().abs()).fold(1.0, f64::max);
        (f64::EPSILON * m, (f64::EPSILON * m).powi(2))
    }
}

/// Learned box with fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniFit {
    pub hyper: UniHyperparams,
    pub log_likelihood: f64,
    pub initial_log_likelihood: f64,
    pub iterations: usize,
}

/// Options for [`learn_uni`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniLearnOptions {
    pub optim: OptimConfig,
    /// Lower bound on `b - a` and `d - c` as a fraction of the pooled
    /// standard deviation and pooled variance. `None` lets the box collapse,
    /// which is then reported as [`Error::DegeneratePrior`].
    pub min_width_fraction: Option<f64>,
}

impl Default for UniLearnOptions {
    fn default() -> Self {
        Self {
            optim: OptimConfig::default(),
            min_width_fraction: Some(1e-3),
        }
    }
}

impl From<OptimConfig> for UniLearnOptions {
    fn from(optim: OptimConfig) -> Self {
        Self {
            optim,
            ..Self::default()
        }
    }
}

struct UniParam {
    mu_floor: f64,
    var_floor: f64,
}

impl UniParam {
    fn decode(&self, x: &[f64]) -> Option<UniHyperparams> {
        let w = self.mu_floor + x[1].exp();
        let c = x[2].exp();
        let h = UniHyperparams {
            a: x[0] - 0.5 * w,
            b: x[0] + 0.5 * w,
            c,
            d: c + self.var_floor + x[3].exp(),
        };
        h.validate().ok().map(|_| h)
    }

    fn encode(&self, h: &UniHyperparams) -> Vec<f64> {
        vec![
            0.5 * (h.a + h.b),
            (h.b - h.a - self.mu_floor).ln(),
            h.c.ln(),
            (h.d - h.c - self.var_floor).ln(),
        ]
    }
}

/// Type-II maximum likelihood over `(m, ln w, ln c, ln(d - c))` with
/// `a = m - w/2`, `b = m + w/2` (widths offset by the optional floor).
pub fn learn_uni(
    stats: &[SufficientStats],
    options: &UniLearnOptions,
    cfg: &QuadratureConfig,
) -> Result<UniFit> {
    if stats.len() < 2 {
        return Err(Error::Empty(
            "learning a prior needs at least two populations",
        ));
    }
    cfg.validate()?;
    let (scale_mu, scale_var) = data_scales(stats);
    let fraction = options.min_width_fraction.unwrap_or(0.0);
    let param = UniParam {
        mu_floor: fraction * scale_mu,
        var_floor: fraction * scale_var,
    };
    let mut init = initial_hyperparams(stats)?;
    // Keep the starting box strictly wider than the floor.
    if init.b - init.a <= 2.0 * param.mu_floor {
        let mid = 0.5 * (init.a + init.b);
        init.a = mid - 1.5 * param.mu_floor;
        init.b = mid + 1.5 * param.mu_floor;
    }
    if init.d - init.c <= 2.0 * param.var_floor {
        init.d = init.c + 3.0 * param.var_floor;
    }
    let initial = log_marginal_likelihood(stats, &init, cfg)?;
    if initial.underflow {
        return Err(Error::Domain(String::from(
            "UNI likelihood underflows at the initial box",
        )));
    }
    // Quadrature failures inside the search are treated as infeasible points.
    let objective = |x: &[f64]| match param.decode(x) {
        Some(h) => {
            log_marginal_likelihood(stats, &h, cfg).map_or(f64::NEG_INFINITY, |m| m.log_likelihood)
        }
        None => f64::NEG_INFINITY,
    };
    let result =
        optim::maximize(objective, &param.encode(&init), &options.optim)?.into_converged()?;
    let hyper = param
        .decode(&result.point)
        .ok_or_else(|| Error::Domain(format!("optimizer left the domain at {:?}", result.point)))?;
    if hyper.b - hyper.a < 1e-6 * scale_mu || hyper.d - hyper.c < 1e-6 * scale_var {
        return Err(Error::DegeneratePrior(format!(
            "learned box {hyper:?} collapsed below 1e-6 of the data scale"
        )));
    }
    Ok(UniFit {
        hyper,
        log_likelihood: result.objective,
        initial_log_likelihood: initial.log_likelihood,
        iterations: result.iterations,
    })
}

/// Which variance estimate is clamped into `[c, d]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UniVariance {
    /// Unbiased sample variance `S`.
    #[default]
    Unbiased,
    /// Box-constrained maximum likelihood: `(n-1)S/n + (x̄ - μ̂)²` at the
    /// clamped mean. Equals the biased sample variance whenever `x̄ ∈ [a, b]`.
    Mle,
}

/// Posterior mode under the uniform box.
pub fn uni_map(
    stats: &SufficientStats,
    hyper: &UniHyperparams,
    variance: UniVariance,
) -> Result<MomentEstimate> {
    hyper.validate()?;
    let mu = stats.mean().clamp(hyper.a, hyper.b);
    let raw = match variance {
        UniVariance::Unbiased => stats.var_unbiased(),
        UniVariance::Mle => stats.var_mle() + (stats.mean() - mu).powi(2),
    };
    MomentEstimate::new(mu, raw.clamp(hyper.c, hyper.d), Method::MpmeUni)
}
