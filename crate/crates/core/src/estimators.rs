//! Classical per-population and pooled estimators.

use crate::error::{Error, Result};
use crate::stats::{Method, MomentEstimate, SufficientStats};

/// Sample mean and unbiased sample variance, unchanged.
pub fn sample_estimate(stats: &SufficientStats) -> MomentEstimate {
    MomentEstimate {
        mu: stats.mean(),
        sigma_sq: stats.var_unbiased(),
        method: Method::SampleEst,
    }
}

/// Mean of the per-population sample variances (equal-variance baseline).
pub fn pooled_variance(stats: &[SufficientStats]) -> Result<f64> {
    if stats.is_empty() {
        return Err(Error::Empty(
            "pooled_variance needs at least one population",
        ));
    }
    Ok(stats.iter().map(SufficientStats::var_unbiased).sum::<f64>() / stats.len() as f64)
}

/// Mean of the per-population sample means (equal-mean baseline).
pub fn pooled_mean(stats: &[SufficientStats]) -> Result<f64> {
    if stats.is_empty() {
        return Err(Error::Empty("pooled_mean needs at least one population"));
    }
    Ok(stats.iter().map(SufficientStats::mean).sum::<f64>() / stats.len() as f64)
}

/// Standard deviations of the sample mean and the sample variance for a
/// Gaussian population: `(σ/√n, √2 σ²/√(n-1))`.
pub fn sample_estimator_std(sigma: f64, n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InsufficientSample {
            population: String::from("<analytic>"),
            count: n,
        });
    }
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let nf = n as f64;
    Ok((
        sigma / nf.sqrt(),
        std::f64::consts::SQRT_2 * sigma * sigma / (nf - 1.0).sqrt(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn stats(n: usize, mean: f64, var: f64) -> SufficientStats {
        SufficientStats::new(n, mean, var).unwrap()
    }

    fn draw(rng: &mut ChaCha8Rng, mu: f64, sigma: f64, n: usize) -> SufficientStats {
        let d = Normal::new(mu, sigma).unwrap();
        let v: Vec<f64> = (0..n).map(|_| d.sample(rng)).collect();
        SufficientStats::from_values(&v).unwrap()
    }

    #[test]
    fn sample_estimate_passes_through() {
        let e = sample_estimate(&stats(3, 1.0, 0.0));
        assert_eq!((e.mu, e.sigma_sq, e.method), (1.0, 0.0, Method::SampleEst));
        let s = SufficientStats::from_values(&[0.0, 2.0]).unwrap();
        let e = sample_estimate(&s);
        assert_eq!((e.mu, e.sigma_sq), (1.0, 2.0));
        let s = stats(7, -3.25, 0.123_456_789);
        let e = sample_estimate(&s);
        assert_eq!(e.mu.to_bits(), s.mean().to_bits());
        assert_eq!(e.sigma_sq.to_bits(), s.var_unbiased().to_bits());
    }

    #[test]
    fn pooled_basic() {
        assert_eq!(
            pooled_variance(&[stats(3, 0.0, 2.0), stats(3, 0.0, 4.0)]).unwrap(),
            3.0
        );
        assert_eq!(
            pooled_mean(&[stats(3, 0.0, 1.0), stats(3, 2.0, 1.0)]).unwrap(),
            1.0
        );
        let same = vec![stats(4, 5.5, 0.7); 9];
        assert!((pooled_variance(&same).unwrap() - 0.7).abs() < 1e-15);
        assert!((pooled_mean(&same).unwrap() - 5.5).abs() < 1e-14);
        assert!(pooled_mean(&[]).is_err());
        assert!(pooled_variance(&[]).is_err());
    }

    #[test]
    fn pooled_permutation_invariant() {
        let list: Vec<_> = (0..6)
            .map(|i| stats(5, i as f64 * 0.3, 1.0 + i as f64))
            .collect();
        let mut rev = list.clone();
        rev.reverse();
        assert!((pooled_mean(&list).unwrap() - pooled_mean(&rev).unwrap()).abs() < 1e-14);
        assert!((pooled_variance(&list).unwrap() - pooled_variance(&rev).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn analytic_std() {
        assert!(sample_estimator_std(1.0, 1).is_err());
        assert!(sample_estimator_std(0.0, 5).is_err());
        let (m, v) = sample_estimator_std(1.0, 5).unwrap();
        assert!((m - 0.4472).abs() < 5e-5 && (v - 0.5f64.sqrt()).abs() < 1e-15);
        let (_, v) = sample_estimator_std(2.0, 5).unwrap();
        assert!((v - 2.828).abs() < 5e-4);
    }

    #[test]
    fn pooled_variance_monte_carlo_rmse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (p, n, trials) = (20, 5, 1000);
        let mut sq = 0.0;
        for _ in 0..trials {
            let list: Vec<_> = (0..p).map(|i| draw(&mut rng, i as f64, 1.0, n)).collect();
            sq += (pooled_variance(&list).unwrap() - 1.0).powi(2);
        }
        let rmse = (sq / trials as f64).sqrt();
        let expected = (2.0 / (p as f64 * (n as f64 - 1.0))).sqrt();
        assert!((expected - 0.158).abs() < 1e-3);
        assert!((rmse / expected - 1.0).abs() < 0.15, "rmse={rmse}");
    }

    #[test]
    fn pooled_mean_monte_carlo_rmse() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (p, n, trials) = (20, 5, 1000);
        let sigmas: Vec<f64> = (0..p)
            .map(|i| 0.95 + 0.1 * i as f64 / (p - 1) as f64)
            .collect();
        let mut sq = 0.0;
        for _ in 0..trials {
            let list: Vec<_> = sigmas.iter().map(|&s| draw(&mut rng, 10.0, s, n)).collect();
            sq += (pooled_mean(&list).unwrap() - 10.0).powi(2);
        }
        let rmse = (sq / trials as f64).sqrt();
        let expected =
            (sigmas.iter().map(|s| s * s / n as f64).sum::<f64>() / (p * p) as f64).sqrt();
        assert!(
            (rmse / expected - 1.0).abs() < 0.15,
            "rmse={rmse} expected={expected}"
        );
    }

    #[test]
    fn sample_estimator_empirical_std() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (sigma, n, trials) = (1.5, 6, 4000);
        let draws: Vec<_> = (0..trials)
            .map(|_| sample_estimate(&draw(&mut rng, 2.0, sigma, n)))
            .collect();
        let sd = |xs: Vec<f64>| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
        };
        let (sm, sv) = sample_estimator_std(sigma, n).unwrap();
        let em = sd(draws.iter().map(|e| e.mu).collect());
        let ev = sd(draws.iter().map(|e| e.sigma_sq).collect());
        assert!((em / sm - 1.0).abs() < 0.10, "{em} vs {sm}");
        assert!((ev / sv - 1.0).abs() < 0.10, "{ev} vs {sv}");
    }
}
