use rand_distr::{Distribution, StandardNormal};

use super::rng::{trial_rng, STREAM_CORRELATION};
use crate::error::{Error, Result};

/// Correlation between two draws sharing an unobserved Gaussian parent:
/// `θ ~ N(μ0, σ0²)`, `α_k | θ ~ N(θ, σ²)` gives `ρ = σ0² / (σ² + σ0²)`.
pub fn induced_correlation(sigma: f64, sigma0: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(sigma0 >= 0.0) {
        return Err(Error::Domain(format!(
            "need sigma > 0 and sigma0 >= 0, got {sigma}, {sigma0}"
        )));
    }
    let s0 = sigma0 * sigma0;
    Ok(s0 / (sigma * sigma + s0))
}

/// Sample correlation of `(α1, α2)` over `draws` draws of the two-level model.
pub fn monte_carlo_correlation(sigma: f64, sigma0: f64, draws: usize, seed: u64) -> Result<f64> {
    induced_correlation(sigma, sigma0)?;
    if draws < 2 {
        return Err(Error::Config(String::from("need at least two draws")));
    }
    let mut rng = trial_rng(seed, 0, 0, STREAM_CORRELATION);
    let (mut s1, mut s2, mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..draws {
        let z0: f64 = StandardNormal.sample(&mut rng);
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let theta = sigma0 * z0;
        let (a1, a2) = (theta + sigma * z1, theta + sigma * z2);
        s1 += a1;
        s2 += a2;
        s11 += a1 * a1;
        s22 += a2 * a2;
        s12 += a1 * a2;
    }
    let n = draws as f64;
    let cov = s12 / n - (s1 / n) * (s2 / n);
    let v1 = s11 / n - (s1 / n).powi(2);
    let v2 = s22 / n - (s2 / n).powi(2);
    Ok(cov / (v1 * v2).sqrt())
}
