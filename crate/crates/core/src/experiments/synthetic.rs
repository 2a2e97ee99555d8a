use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng::{trial_rng, STREAM_SYNTHETIC};
use crate::error::{Error, Result};
use crate::stats::PopulationSample;

/// Synthetic setting: `P` Gaussian populations with means and standard
/// deviations equally spaced over the given ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub populations: usize,
    pub samples_per_population: usize,
    pub mu_range: (f64, f64),
    pub sigma_range: (f64, f64),
    pub trials: usize,
    pub seed: u64,
}

impl SyntheticConfig {
    /// Means over `[9.5, 10.5]`, standard deviations over `[0.95, 1.05]`.
    pub fn example1(populations: usize, samples: usize, trials: usize, seed: u64) -> Self {
        Self {
            populations,
            samples_per_population: samples,
            mu_range: (9.5, 10.5),
            sigma_range: (0.95, 1.05),
            trials,
            seed,
        }
    }

    /// As [`SyntheticConfig::example1`] with standard deviations over `[1.9, 2.1]`.
    pub fn example2(populations: usize, samples: usize, trials: usize, seed: u64) -> Self {
        Self {
            sigma_range: (1.9, 2.1),
            ..Self::example1(populations, samples, trials, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let SyntheticConfig {
            populations,
            samples_per_population,
            mu_range,
            sigma_range,
            trials,
            ..
        } = self;
        if *populations == 0 || *trials == 0 {
            return Err(Error::Config(String::from(
                "populations and trials must be positive",
            )));
        }
        if *samples_per_population < 2 {
            return Err(Error::Config(String::from(
                "samples per population must be at least 2",
            )));
        }
        if !(mu_range.0 <= mu_range.1) || !(0.0 < sigma_range.0 && sigma_range.0 <= sigma_range.1) {
            return Err(Error::Config(format!(
                "invalid ranges: mu {mu_range:?}, sigma {sigma_range:?}"
            )));
        }
        if *populations == 1 && (mu_range.0 != mu_range.1 || sigma_range.0 != sigma_range.1) {
            return Err(Error::Config(String::from(
                "equal spacing is undefined for a single population with distinct range endpoints",
            )));
        }
        Ok(())
    }

    pub fn ground_truth(&self) -> Result<GroundTruth> {
        self.validate()?;
        let p = self.populations;
        let spaced = |(lo, hi): (f64, f64), i: usize| {
            if p == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (p - 1) as f64
            }
        };
        let mu = (0..p).map(|i| spaced(self.mu_range, i)).collect();
        let sigma_sq = (0..p)
            .map(|i| spaced(self.sigma_range, i).powi(2))
            .collect();
        Ok(GroundTruth { mu, sigma_sq })
    }
}

/// True per-population moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub mu: Vec<f64>,
    pub sigma_sq: Vec<f64>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.sigma_sq.iter().map(|v| v.sqrt()).collect()
    }
}

/// Data for one trial; population `i` of trial `t` always sees the same draws.
pub fn generate_synthetic(
    cfg: &SyntheticConfig,
    trial_index: usize,
) -> Result<(GroundTruth, Vec<PopulationSample>)> {
    let truth = cfg.ground_truth()?;
    if trial_index >= cfg.trials {
        return Err(Error::Config(format!(
            "trial index {trial_index} out of range for {} trials",
            cfg.trials
        )));
    }
    let samples = truth
        .mu
        .iter()
        .zip(&truth.sigma_sq)
        .enumerate()
        .map(|(i, (&mu, &var))| {
            let mut rng = trial_rng(cfg.seed, trial_index as u64, i as u64, STREAM_SYNTHETIC);
            let sigma = var.sqrt();
            let values = (0..cfg.samples_per_population)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    mu + sigma * z
                })
                .collect();
            PopulationSample {
                id: format!("pop{}", i + 1),
                values,
            }
        })
        .collect();
    Ok((truth, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_rules() {
        let t = SyntheticConfig::example1(2, 5, 1, 0)
            .ground_truth()
            .unwrap();
        assert_eq!(t.mu, vec![9.5, 10.5]);
        let t = SyntheticConfig::example1(3, 5, 1, 0)
            .ground_truth()
            .unwrap();
        let s = t.sigma();
        for (got, want) in s.iter().zip([0.95, 1.00, 1.05]) {
            assert!((got - want).abs() < 1e-12);
        }
        let t = SyntheticConfig::example2(2, 5, 1, 0)
            .ground_truth()
            .unwrap();
        let s = t.sigma();
        assert!((s[0] - 1.9).abs() < 1e-12 && (s[1] - 2.1).abs() < 1e-12);
    }

    #[test]
    fn single_population() {
        assert!(SyntheticConfig::example1(1, 5, 1, 0)
            .ground_truth()
            .is_err());
        let cfg = SyntheticConfig {
            mu_range: (3.0, 3.0),
            sigma_range: (2.0, 2.0),
            ..SyntheticConfig::example1(1, 5, 1, 0)
        };
        let t = cfg.ground_truth().unwrap();
        assert_eq!((t.mu[0], t.sigma_sq[0]), (3.0, 4.0));
    }

    #[test]
    fn trials_are_reproducible_in_isolation() {
        let cfg = SyntheticConfig::example1(4, 6, 10, 99);
        let (_, a) = generate_synthetic(&cfg, 7).unwrap();
        let (_, b) = generate_synthetic(&cfg, 7).unwrap();
        let (_, c) = generate_synthetic(&cfg, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|p| p.values.len() == 6));
        assert!(generate_synthetic(&cfg, 10).is_err());
        // Population streams do not depend on P.
        let wider = SyntheticConfig {
            populations: 4,
            ..cfg.clone()
        };
        assert_eq!(generate_synthetic(&wider, 7).unwrap().1[0], a[0]);
    }
}
