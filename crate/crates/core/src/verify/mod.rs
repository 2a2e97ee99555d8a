//! Brute-force oracles for the closed-form and quadrature paths.
//!
//! These are slow on purpose: dense tensor grids and direct evaluation of
//! the Gaussian likelihood times a prior density, with no use of the
//! conjugate update or the reduced one-dimensional integral.

mod suites;

pub use suites::{
    correlation_suite, map_argmax_suite, nix_likelihood_suite, uni_likelihood_suite, CaseResult,
    Suite, SuiteReport,
};

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::nix::NixHyperparams;
use crate::special::{ln_gamma_pos, owen_q, QuadratureConfig};
use crate::stats::SufficientStats;
use crate::uni::UniHyperparams;

/// `ln p(X | μ, σ²)` for `n` iid Gaussian draws summarized by `stats`.
pub fn gaussian_log_likelihood(stats: &SufficientStats, mu: f64, sigma_sq: f64) -> f64 {
    let n = stats.n() as f64;
    let dev = stats.mean() - mu;
    -0.5 * n * (2.0 * PI * sigma_sq).ln() - (n * dev * dev + stats.scatter()) / (2.0 * sigma_sq)
}

/// Integration grid for [`numeric_log_marginal`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginalGrid {
    /// Trapezoid rule directly in `(μ, σ²)` over the given rectangle. Suited
    /// to priors with bounded support.
    Box {
        mu: (f64, f64),
        sigma_sq: (f64, f64),
        nodes: usize,
    },
    /// Trapezoid rule in `(z, ln σ²)` with `μ = mu_center + z σ`, so the μ
    /// window widens with σ. Suited to heavy right tails in σ².
    Scaled {
        mu_center: f64,
        z: (f64, f64),
        sigma_sq: (f64, f64),
        nodes: usize,
    },
}

fn trapezoid_weight(i: usize, nodes: usize) -> f64 {
    if i == 0 || i + 1 == nodes {
        0.5
    } else {
        1.0
    }
}

fn linspace(lo: f64, hi: f64, nodes: usize) -> (Vec<f64>, f64) {
    let h = (hi - lo) / (nodes - 1) as f64;
    let mut xs: Vec<f64> = (0..nodes).map(|i| lo + i as f64 * h).collect();
    xs[nodes - 1] = hi;
    (xs, h)
}

/// `ln ∫∫ p(X | μ, σ²) p(μ, σ²) dμ dσ²` on a tensor grid.
///
/// `log_prior` returns the log prior density (may be `-inf`). Summation
/// is shifted by the grid maximum so nothing underflows.
pub fn numeric_log_marginal<F>(
    stats: &SufficientStats,
    log_prior: F,
    grid: &MarginalGrid,
) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    // Each node: log integrand plus log of the trapezoid/Jacobian weight.
    let mut logs: Vec<f64>;
    let cell: f64;
    match *grid {
        MarginalGrid::Box {
            mu,
            sigma_sq,
            nodes,
        } => {
            check_window(mu, sigma_sq, nodes)?;
            let (mus, hm) = linspace(mu.0, mu.1, nodes);
            let (ss, hs) = linspace(sigma_sq.0, sigma_sq.1, nodes);
            cell = hm * hs;
            logs = Vec::with_capacity(nodes * nodes);
            for (i, &m) in mus.iter().enumerate() {
                for (j, &s) in ss.iter().enumerate() {
                    let v = gaussian_log_likelihood(stats, m, s) + log_prior(m, s);
                    if v.is_nan() || v == f64::INFINITY {
                        return Err(Error::NonFiniteIntegrand { mu: m, sigma_sq: s });
                    }
                    logs.push(v + (trapezoid_weight(i, nodes) * trapezoid_weight(j, nodes)).ln());
                }
            }
        }
        MarginalGrid::Scaled {
            mu_center,
            z,
            sigma_sq,
            nodes,
        } => {
            check_window(z, sigma_sq, nodes)?;
            let (zs, hz) = linspace(z.0, z.1, nodes);
            let (us, hu) = linspace(sigma_sq.0.ln(), sigma_sq.1.ln(), nodes);
            cell = hz * hu;
            logs = Vec::with_capacity(nodes * nodes);
            for (j, &u) in us.iter().enumerate() {
                let s = u.exp();
                let sigma = s.sqrt();
                // dμ dσ² = σ · σ² dz du
                let log_jacobian = 1.5 * u;
                for (i, &zi) in zs.iter().enumerate() {
                    let m = mu_center + zi * sigma;
                    let v = gaussian_log_likelihood(stats, m, s) + log_prior(m, s);
                    if v.is_nan() || v == f64::INFINITY {
                        return Err(Error::NonFiniteIntegrand { mu: m, sigma_sq: s });
                    }
                    logs.push(
                        v + log_jacobian
                            + (trapezoid_weight(i, nodes) * trapezoid_weight(j, nodes)).ln(),
                    );
                }
            }
        }
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let sum: f64 = logs.iter().map(|v| (v - max).exp()).sum();
    Ok(max + sum.ln() + cell.ln())
}

/// [`numeric_log_marginal`] exponentiated.
pub fn numeric_marginal<F>(
    stats: &SufficientStats,
    log_prior: F,
    grid: &MarginalGrid,
) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    numeric_log_marginal(stats, log_prior, grid).map(f64::exp)
}

fn check_window(a: (f64, f64), b: (f64, f64), nodes: usize) -> Result<()> {
    if nodes < 2 || !(a.0 < a.1) || !(b.0 < b.1) || !(b.0 > 0.0) {
        return Err(Error::Domain(format!(
            "invalid oracle grid: {a:?} x {b:?} with {nodes} nodes"
        )));
    }
    Ok(())
}

/// A [`MarginalGrid::Scaled`] sized for the NIX integrand of one population:
/// ±12 posterior standard errors in μ and a σ² range that leaves well under
/// `1e-10` of the mass outside.
pub fn nix_marginal_grid(
    stats: &SufficientStats,
    hyper: &NixHyperparams,
    nodes: usize,
) -> MarginalGrid {
    let n = stats.n() as f64;
    let kappa_n = hyper.kappa0 + n;
    let nu_n = hyper.nu0 + n;
    let center = (hyper.kappa0 * hyper.mu0 + n * stats.mean()) / kappa_n;
    let scale_sq = (hyper.nu0 * hyper.sigma0_sq
        + stats.scatter()
        + hyper.kappa0 * n * (hyper.mu0 - stats.mean()).powi(2) / kappa_n)
        / nu_n;
    let half = 12.0 / kappa_n.sqrt();
    // Lower side decays like exp(-ν s/(2σ²)); upper like (σ²)^{-ν/2}.
    let lo = scale_sq * nu_n / 120.0;
    let hi = scale_sq * (60.0 / nu_n).exp() * 10.0;
    MarginalGrid::Scaled {
        mu_center: center,
        z: (-half, half),
        sigma_sq: (lo, hi),
        nodes,
    }
}

/// Windows at ±`k` standard errors around the sample estimates: μ by
/// `sqrt(S/n)` and σ² by `S sqrt(2/(n-1))`, the lower σ² edge floored at a
/// small positive value.
pub fn standard_error_window(stats: &SufficientStats, k: f64) -> ((f64, f64), (f64, f64)) {
    let n = stats.n() as f64;
    let s = stats.var_unbiased();
    let se_mu = (s / n).sqrt();
    let se_var = s * (2.0 / (n - 1.0)).sqrt();
    let mu = (stats.mean() - k * se_mu, stats.mean() + k * se_mu);
    let sigma_sq = ((s - k * se_var).max(s * 1e-3), s + k * se_var);
    (mu, sigma_sq)
}

/// Grid point maximizing `log_posterior` over the windows.
///
/// Ties go to the smallest `(μ index, σ² index)`. Fails with
/// [`Error::WindowTooSmall`] when every maximizer lies on the grid edge.
pub fn grid_map_argmax<F>(
    log_posterior: F,
    mu_window: (f64, f64),
    sigma_sq_window: (f64, f64),
    nodes: usize,
) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> f64,
{
    check_window(mu_window, sigma_sq_window, nodes)?;
    let (mus, _) = linspace(mu_window.0, mu_window.1, nodes);
    let (ss, _) = linspace(sigma_sq_window.0, sigma_sq_window.1, nodes);
    let edge = |i: usize| i == 0 || i + 1 == nodes;
    let mut best = f64::NEG_INFINITY;
    let mut arg = (0usize, 0usize);
    let mut interior_hit = false;
    for (i, &m) in mus.iter().enumerate() {
        for (j, &s) in ss.iter().enumerate() {
            let v = log_posterior(m, s);
            if v > best {
                best = v;
                arg = (i, j);
                interior_hit = !(edge(i) || edge(j));
            } else if v == best && !(edge(i) || edge(j)) {
                interior_hit = true;
            }
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Domain(String::from(
            "log posterior is -inf on the whole grid",
        )));
    }
    if !interior_hit {
        return Err(Error::WindowTooSmall);
    }
    Ok((mus[arg.0], ss[arg.1]))
}

/// Grid cell size for the windows used by [`grid_map_argmax`].
pub fn grid_cell(mu_window: (f64, f64), sigma_sq_window: (f64, f64), nodes: usize) -> (f64, f64) {
    let k = (nodes - 1) as f64;
    (
        (mu_window.1 - mu_window.0) / k,
        (sigma_sq_window.1 - sigma_sq_window.0) / k,
    )
}

/// Exact NIX log posterior up to a constant: Gaussian likelihood plus log prior.
pub fn nix_log_posterior(
    stats: &SufficientStats,
    hyper: &NixHyperparams,
    mu: f64,
    sigma_sq: f64,
) -> f64 {
    gaussian_log_likelihood(stats, mu, sigma_sq) + hyper.log_density(mu, sigma_sq)
}

/// Exact UNI log posterior up to a constant.
pub fn uni_log_posterior(
    stats: &SufficientStats,
    hyper: &UniHyperparams,
    mu: f64,
    sigma_sq: f64,
) -> f64 {
    let prior = hyper.log_density(mu, sigma_sq);
    if prior == f64::NEG_INFINITY {
        return prior;
    }
    gaussian_log_likelihood(stats, mu, sigma_sq) + prior
}

/// UNI log marginal likelihood of one population through the truncated
/// `Q_f` integral with `f = n - 3`.
///
/// Substituting `y = sqrt((n-1)S)/σ` turns the σ² integral over `[c, d]` into
/// a chi-weighted integral over `[sqrt((n-1)S/d), sqrt((n-1)S/c)]`, so the box
/// contributes by inclusion–exclusion:
/// `Q(t_b; R_c) − Q(t_a; R_c) − Q(t_b; R_d) + Q(t_a; R_d)`.
/// Requires `n >= 4` and `S > 0`.
pub fn uni_log_marginal_owen(
    stats: &SufficientStats,
    hyper: &UniHyperparams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let n = stats.n();
    if n < 4 || stats.var_unbiased() <= 0.0 {
        return Err(Error::Domain(String::from(
            "the Q_f form needs n >= 4 and a positive sample variance",
        )));
    }
    let nf = n as f64;
    let f = (n - 3) as u32;
    let ff = f as f64;
    let scatter = stats.scatter();
    let t = |edge: f64| (edge - stats.mean()) * (nf * ff).sqrt() / scatter.sqrt();
    let r = |v: f64| (scatter / v).sqrt();
    let (tb, ta) = (t(hyper.b), t(hyper.a));
    let (rc, rd) = (r(hyper.c), r(hyper.d));
    let q = |tt: f64, rr: f64| owen_q(f, tt, 0.0, rr, cfg).map(|i| i.value);
    let bracket = q(tb, rc)? - q(ta, rc)? - q(tb, rd)? + q(ta, rd)?;
    if !(bracket > 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let log_const = -0.5 * (nf - 1.0) * (2.0 * PI).ln() - 0.5 * nf.ln() + LN_2
        - 0.5 * (nf - 3.0) * scatter.ln()
        + ln_gamma_pos(0.5 * ff)
        + 0.5 * (ff - 2.0) * LN_2
        - hyper.log_volume();
    Ok(log_const + bracket.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(n: usize, mean: f64, var: f64) -> SufficientStats {
        SufficientStats::new(n, mean, var).unwrap()
    }

    #[test]
    fn narrow_box_is_point_evaluation() {
        let s = stats(5, 1.0, 2.0);
        let w = 1e-4;
        let h = UniHyperparams::new(1.0 - w / 2.0, 1.0 + w / 2.0, 2.0 - w / 2.0, 2.0 + w / 2.0)
            .unwrap();
        let grid = MarginalGrid::Box {
            mu: (h.a, h.b),
            sigma_sq: (h.c, h.d),
            nodes: 21,
        };
        // Integrate the likelihood alone (flat unit prior) over the box.
        let integral = numeric_marginal(&s, |_, _| 0.0, &grid).unwrap();
        let point = gaussian_log_likelihood(&s, 1.0, 2.0).exp() * w * w;
        assert!((integral / point - 1.0).abs() < 0.01);
    }

    #[test]
    fn node_doubling_is_self_consistent() {
        let s = stats(6, 0.4, 1.3);
        let h = NixHyperparams::new(0.0, 2.0, 4.0, 1.0).unwrap();
        let prior = |m, v| h.log_density(m, v);
        let a = numeric_log_marginal(&s, prior, &nix_marginal_grid(&s, &h, 1000)).unwrap();
        let b = numeric_log_marginal(&s, prior, &nix_marginal_grid(&s, &h, 2000)).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} {b}");
    }

    #[test]
    fn flat_posterior_returns_first_point() {
        let (m, v) = grid_map_argmax(|_, _| 0.0, (-1.0, 1.0), (0.5, 2.0), 11).unwrap();
        assert_eq!((m, v), (-1.0, 0.5));
    }

    #[test]
    fn boundary_maximizer_is_rejected() {
        let r = grid_map_argmax(|m, v| m + v, (0.0, 1.0), (0.5, 2.0), 11);
        assert_eq!(r, Err(Error::WindowTooSmall));
    }

    #[test]
    fn standard_error_window_is_centered() {
        let s = stats(5, 3.0, 2.0);
        let (mu, var) = standard_error_window(&s, 10.0);
        assert!((mu.0 + mu.1 - 6.0).abs() < 1e-12);
        assert!(var.0 > 0.0 && var.1 > 2.0);
    }

    #[test]
    fn owen_form_needs_four_points() {
        let h = UniHyperparams::new(0.0, 1.0, 0.5, 1.0).unwrap();
        assert!(
            uni_log_marginal_owen(&stats(3, 0.5, 1.0), &h, &QuadratureConfig::default()).is_err()
        );
    }
}
