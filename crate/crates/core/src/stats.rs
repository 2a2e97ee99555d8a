//! Shared domain types: raw samples, sufficient statistics, point estimates
//! and aggregated error reports.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw observations for one population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSample {
    pub id: String,
    pub values: Vec<f64>,
}

impl PopulationSample {
    /// Builds a sample, rejecting empty or non-finite data.
    pub fn new(id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let sample = Self {
            id: id.into(),
            values,
        };
        sample.validate()?;
        Ok(sample)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InsufficientSample {
                population: self.id.clone(),
                count: 0,
            });
        }
        if let Some((index, &value)) = self.values.iter().enumerate().find(|(_, v)| !v.is_finite())
        {
            return Err(Error::InvalidDatum {
                population: self.id.clone(),
                index,
                value,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sufficient_stats(&self) -> Result<SufficientStats> {
        SufficientStats::from_sample(self)
    }
}

/// Sample size, sample mean and unbiased sample variance of one population.
///
/// Every estimator in the crate consumes only these three numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    n: usize,
    mean: f64,
    var_unbiased: f64,
}

impl SufficientStats {
    /// Builds statistics directly, e.g. from published summaries.
    pub fn new(n: usize, mean: f64, var_unbiased: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InsufficientSample {
                population: String::from("<summary>"),
                count: n,
            });
        }
        if !mean.is_finite() || !var_unbiased.is_finite() || var_unbiased < 0.0 {
            return Err(Error::Domain(format!(
                "invalid summary statistics: mean={mean}, var={var_unbiased}"
            )));
        }
        Ok(Self {
            n,
            mean,
            var_unbiased,
        })
    }

    /// Two-pass mean and variance with the usual correction term, so a small
    /// spread around a large mean is not swamped by cancellation.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::from_sample(&PopulationSample {
            id: String::from("<values>"),
            values: values.to_vec(),
        })
    }

    pub fn from_sample(sample: &PopulationSample) -> Result<Self> {
        sample.validate()?;
        let values = &sample.values;
        let n = values.len();
        if n < 2 {
            return Err(Error::InsufficientSample {
                population: sample.id.clone(),
                count: n,
            });
        }
        let first = values[0];
        if values.iter().all(|&v| v == first) {
            return Ok(Self {
                n,
                mean: first,
                var_unbiased: 0.0,
            });
        }
        let nf = n as f64;
        let naive = values.iter().sum::<f64>() / nf;
        let (sum_d, sum_d2) = values.iter().fold((0.0, 0.0), |(s, s2), &v| {
            let d = v - naive;
            (s + d, s2 + d * d)
        });
        let mean = naive + sum_d / nf;
        let var = ((sum_d2 - sum_d * sum_d / nf) / (nf - 1.0)).max(0.0);
        Ok(Self {
            n,
            mean,
            var_unbiased: var,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn var_unbiased(&self) -> f64 {
        self.var_unbiased
    }

    /// Maximum-likelihood (biased) variance, `(n-1) S / n`.
    pub fn var_mle(&self) -> f64 {
        self.var_unbiased * (self.n as f64 - 1.0) / self.n as f64
    }

    /// Sum of squared deviations from the sample mean, `(n-1) S`.
    pub fn scatter(&self) -> f64 {
        self.var_unbiased * (self.n as f64 - 1.0)
    }
}

/// Estimator that produced a [`MomentEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    SampleEst,
    PooledMean,
    PooledVar,
    MpmeNix,
    MpmeNixUnbiased,
    MpmeUni,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::SampleEst => "SampleEst",
            Method::PooledMean => "PooledMean",
            Method::PooledVar => "PooledVar",
            Method::MpmeNix => "MpmeNix",
            Method::MpmeNixUnbiased => "MpmeNixUnbiased",
            Method::MpmeUni => "MpmeUni",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A `(mu, sigma_sq)` point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mu: f64,
    pub sigma_sq: f64,
    pub method: Method,
}

impl MomentEstimate {
    pub fn new(mu: f64, sigma_sq: f64, method: Method) -> Result<Self> {
        if !(sigma_sq >= 0.0) || !mu.is_finite() || !sigma_sq.is_finite() {
            return Err(Error::Domain(format!(
                "invalid moment estimate: mu={mu}, sigma_sq={sigma_sq}"
            )));
        }
        Ok(Self {
            mu,
            sigma_sq,
            method,
        })
    }
}

/// RMSE over Monte Carlo trials, per population and averaged over populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub eps_mu: f64,
    pub eps_sigma_sq: f64,
    pub per_population_mu_rmse: Vec<f64>,
    pub per_population_var_rmse: Vec<f64>,
    pub trials: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_pass_oracle(values: &[f64]) -> (f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn identical_values_have_zero_variance() {
        let s = SufficientStats::from_values(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((s.n(), s.mean(), s.var_unbiased()), (3, 1.0, 0.0));
        let s = SufficientStats::from_values(&[0.1, 0.1, 0.1]).unwrap();
        assert_eq!(s.var_unbiased(), 0.0);
        assert_eq!(s.mean(), 0.1);
    }

    #[test]
    fn two_values() {
        let s = SufficientStats::from_values(&[0.0, 2.0]).unwrap();
        assert_eq!((s.n(), s.mean(), s.var_unbiased()), (2, 1.0, 2.0));
    }

    #[test]
    fn matches_two_pass_reference() {
        let values = [9.1, 10.3, 9.8, 10.0, 9.6];
        let s = SufficientStats::from_values(&values).unwrap();
        let (m, v) = two_pass_oracle(&values);
        assert!((s.mean() - m).abs() <= 1e-12 * m.abs());
        assert!((s.var_unbiased() - v).abs() <= 1e-12 * v.abs());
    }

    #[test]
    fn rejects_short_and_non_finite() {
        assert!(matches!(
            SufficientStats::from_values(&[3.0]),
            Err(Error::InsufficientSample { count: 1, .. })
        ));
        assert!(matches!(
            SufficientStats::from_values(&[1.0, f64::NAN]),
            Err(Error::InvalidDatum { index: 1, .. })
        ));
        assert!(PopulationSample::new("p", vec![]).is_err());
        assert!(PopulationSample::new("p", vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn large_mean_small_spread() {
        // Kahan-compensated two-pass oracle on offsets.
        let values: Vec<f64> = (0..50)
            .map(|i| 1.0e6 + 1.0e-3 * ((i * 37 % 17) as f64 / 17.0 - 0.5))
            .collect();
        let n = values.len() as f64;
        let (mut sum, mut c) = (0.0f64, 0.0f64);
        for &v in &values {
            let y = v - c;
            let t = sum + y;
            c = (t - sum) - y;
            sum = t;
        }
        let mean = sum / n;
        let (mut ss, mut c2) = (0.0f64, 0.0f64);
        for &v in &values {
            let d = v - mean;
            let y = d * d - c2;
            let t = ss + y;
            c2 = (t - ss) - y;
            ss = t;
        }
        let oracle = ss / (n - 1.0);
        let s = SufficientStats::from_values(&values).unwrap();
        assert!((s.var_unbiased() - oracle).abs() <= 1e-6 * oracle);
    }

    #[test]
    fn moment_estimate_rejects_negative_variance() {
        assert!(MomentEstimate::new(0.0, -1.0, Method::SampleEst).is_err());
        assert!(MomentEstimate::new(0.0, 0.0, Method::SampleEst).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn shift_and_scale_equivariance(
                values in prop::collection::vec(-100.0f64..100.0, 2..20),
                c in -1.0e3f64..1.0e3,
                s in 0.1f64..10.0,
            ) {
                let base = SufficientStats::from_values(&values).unwrap();
                let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
                let scaled: Vec<f64> = values.iter().map(|v| v * s).collect();
                let sh = SufficientStats::from_values(&shifted).unwrap();
                let sc = SufficientStats::from_values(&scaled).unwrap();
                let tol = 1e-10 * (1.0 + base.mean().abs() + c.abs());
                prop_assert!((sh.mean() - (base.mean() + c)).abs() <= tol);
                let vtol = 1e-10 * base.var_unbiased().max(1e-300)
                    + 1e-12 * (1.0 + c.abs()).powi(2);
                prop_assert!((sh.var_unbiased() - base.var_unbiased()).abs() <= vtol);
                prop_assert!((sc.mean() - s * base.mean()).abs() <= 1e-10 * (1.0 + (s * base.mean()).abs()));
                prop_assert!((sc.var_unbiased() - s * s * base.var_unbiased()).abs()
                    <= 1e-10 * (s * s * base.var_unbiased()).max(1e-300));
            }
        }
    }
}
