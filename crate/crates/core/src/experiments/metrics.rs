use super::synthetic::GroundTruth;
use crate::error::{Error, Result};
use crate::stats::{ErrorReport, MomentEstimate};

/// Per-population RMSE over trials, averaged over populations.
///
/// `estimates[j][i]` is the estimate for population `i` in trial `j`.
pub fn error_report(estimates: &[Vec<MomentEstimate>], truth: &GroundTruth) -> Result<ErrorReport> {
    if estimates.is_empty() {
        return Err(Error::Empty("error report needs at least one trial"));
    }
    let p = truth.len();
    if p == 0 || truth.sigma_sq.len() != p {
        return Err(Error::DimensionMismatch(String::from(
            "ground truth is empty or ragged",
        )));
    }
    if let Some((j, row)) = estimates.iter().enumerate().find(|(_, r)| r.len() != p) {
        return Err(Error::DimensionMismatch(format!(
            "trial {j} has {} estimates, expected {p}",
            row.len()
        )));
    }
    let m = estimates.len() as f64;
    let rmse = |f: &dyn Fn(&MomentEstimate, usize) -> f64| -> Vec<f64> {
        (0..p)
            .map(|i| {
                (estimates
                    .iter()
                    .map(|row| f(&row[i], i).powi(2))
                    .sum::<f64>()
                    / m)
                    .sqrt()
            })
            .collect()
    };
    let mu_rmse = rmse(&|e, i| truth.mu[i] - e.mu);
    let var_rmse = rmse(&|e, i| truth.sigma_sq[i] - e.sigma_sq);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(ErrorReport {
        eps_mu: mean(&mu_rmse),
        eps_sigma_sq: mean(&var_rmse),
        per_population_mu_rmse: mu_rmse,
        per_population_var_rmse: var_rmse,
        trials: estimates.len(),
    })
}
