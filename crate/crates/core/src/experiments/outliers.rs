use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::SufficientStats;

pub const DEFAULT_PRUNE_K: f64 = 5.0;

// Makes the MAD a consistent estimator of a Gaussian standard deviation.
const MAD_SCALE: f64 = 1.4826;

/// Population indices kept and removed by [`prune_outliers`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pruned {
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Flags populations whose sample mean is more than `k` scaled MADs from the
/// median of sample means. With a zero MAD every nonzero deviation is flagged.
pub fn prune_outliers(stats: &[SufficientStats], k: f64) -> Result<Pruned> {
    if stats.len() < 3 {
        return Err(Error::Config(String::from(
            "outlier pruning needs at least 3 populations",
        )));
    }
    if !(k > 0.0) {
        return Err(Error::Config(format!(
            "pruning threshold must be positive, got {k}"
        )));
    }
    let means: Vec<f64> = stats.iter().map(SufficientStats::mean).collect();
    let center = median(&mut means.clone());
    let deviations: Vec<f64> = means.iter().map(|m| (m - center).abs()).collect();
    let mad = MAD_SCALE * median(&mut deviations.clone());
    let threshold = k * mad;
    let (kept, removed): (Vec<usize>, Vec<usize>) =
        (0..stats.len()).partition(|&i| deviations[i] <= threshold);
    if kept.is_empty() {
        return Err(Error::Config(String::from(
            "outlier pruning removed every population",
        )));
    }
    Ok(Pruned { kept, removed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_means(means: &[f64]) -> Vec<SufficientStats> {
        means
            .iter()
            .map(|&m| SufficientStats::new(5, m, 1.0).unwrap())
            .collect()
    }

    #[test]
    fn removes_constructed_outlier() {
        let mut means = vec![0.0; 9];
        means.push(100.0);
        // Nine identical means give zero MAD.
        let r = prune_outliers(&with_means(&means), 5.0).unwrap();
        assert_eq!(r.removed, vec![9]);
        assert_eq!(r.kept, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn spread_data_with_outlier() {
        let mut means: Vec<f64> = (0..9).map(|i| 10.0 + 0.1 * i as f64).collect();
        means.push(100.0);
        let r = prune_outliers(&with_means(&means), DEFAULT_PRUNE_K).unwrap();
        assert_eq!(r.removed, vec![9]);
    }

    #[test]
    fn homogeneous_keeps_all() {
        let means: Vec<f64> = (0..10).map(|i| 10.0 + 0.01 * (i as f64 - 4.5)).collect();
        let r = prune_outliers(&with_means(&means), 5.0).unwrap();
        assert!(r.removed.is_empty());
    }

    #[test]
    fn zero_mad_flags_any_deviation() {
        let r = prune_outliers(&with_means(&[2.0, 2.0, 2.0, 2.0, 2.000_001]), 5.0).unwrap();
        assert_eq!(r.removed, vec![4]);
    }

    #[test]
    fn preconditions() {
        assert!(prune_outliers(&with_means(&[1.0, 2.0]), 5.0).is_err());
        assert!(prune_outliers(&with_means(&[1.0, 2.0, 3.0]), 0.0).is_err());
    }
}
