//! Special functions and adaptive quadrature.
//!
//! Log-gamma, the standard normal pdf/cdf, the scaled inverse chi-squared
//! density, the truncated Owen-type `Q_f` integral, and a Gauss–Kronrod
//! (G10/K21) globally adaptive integrator used by the uniform-prior
//! likelihood.

use std::f64::consts::{LN_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Tolerances for [`integrate`] and [`integrate_to_infinity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::Config(format!(
                "invalid quadrature config: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Quadrature result with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

// Lanczos approximation, g = 607/128, 15 terms (Godfrey).
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_87e-4,
    0.465_236_289_270_485_7e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx).
        return (PI / (PI * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (k, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + sum.ln()
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `ln(Φ(hi) - Φ(lo))`, evaluated on whichever tail avoids cancellation.
/// Returns `-inf` when the difference underflows.
pub fn ln_normal_cdf_diff(lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return f64::NEG_INFINITY;
    }
    let diff = if lo >= 0.0 {
        0.5 * (libm::erfc(lo / SQRT_2) - libm::erfc(hi / SQRT_2))
    } else if hi <= 0.0 {
        0.5 * (libm::erfc(-hi / SQRT_2) - libm::erfc(-lo / SQRT_2))
    } else {
        1.0 - 0.5 * libm::erfc(hi / SQRT_2) - 0.5 * libm::erfc(-lo / SQRT_2)
    };
    if diff > 0.0 {
        diff.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Log density of the scaled inverse chi-squared distribution
/// `Scale-inv-χ²(nu0, sigma0_sq)` at `sigma_sq`.
pub fn scaled_inv_chi_sq_logpdf(sigma_sq: f64, nu0: f64, sigma0_sq: f64) -> Result<f64> {
    if !(sigma_sq > 0.0) || !(nu0 > 0.0) || !(sigma0_sq > 0.0) {
        return Err(Error::Domain(format!(
            "scaled inverse chi-squared needs positive arguments, got ({sigma_sq}, {nu0}, {sigma0_sq})"
        )));
    }
    let half = 0.5 * nu0;
    Ok(half * (half * sigma0_sq).ln()
        - ln_gamma_pos(half)
        - (half + 1.0) * sigma_sq.ln()
        - half * sigma0_sq / sigma_sq)
}

/// Truncated Owen-type integral
///
/// `Q_f(t, δ; 0, R) = ∫₀^R √(2π) y^{f-1} φ(y) / (Γ(f/2) 2^{(f-2)/2}) · Φ(t y / √f − δ) dy`.
///
/// The weight is the chi density with `f` degrees of freedom, so
/// `Q_f(+∞, 0; 0, ∞) = 1`. `r` may be `f64::INFINITY`.
pub fn owen_q(f: u32, t: f64, delta: f64, r: f64, cfg: &QuadratureConfig) -> Result<Integral> {
    if f == 0 {
        return Err(Error::Domain(String::from("owen_q requires f >= 1")));
    }
    if !(r > 0.0) || t.is_nan() || !delta.is_finite() {
        return Err(Error::Domain(format!(
            "owen_q requires r > 0 and finite delta, got r={r}, t={t}, delta={delta}"
        )));
    }
    let ff = f as f64;
    let log_norm = ln_gamma_pos(0.5 * ff) + 0.5 * (ff - 2.0) * LN_2;
    let sqrt_f = ff.sqrt();
    let integrand = |y: f64| {
        if y <= 0.0 {
            return if f == 1 {
                (-log_norm).exp() * std_normal_cdf(-delta)
            } else {
                0.0
            };
        }
        let weight = ((ff - 1.0) * y.ln() - 0.5 * y * y - log_norm).exp();
        weight * std_normal_cdf(t * y / sqrt_f - delta)
    };
    let result = if r.is_infinite() {
        integrate_to_infinity(integrand, 0.0, cfg)?
    } else {
        integrate(integrand, 0.0, r, cfg)?
    };
    Ok(result)
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

/// Globally adaptive G10/K21 quadrature of `f` over `[a, b]`.
///
/// The segment with the largest error estimate is bisected until the total
/// error meets `max(abs_tol, rel_tol·|I|)`. Running out of subdivisions is an
/// error that carries the best estimate.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration limits must be finite: [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
        });
    }
    let first = kronrod21(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::Quadrature {
            estimate: first.value,
            error_bound: f64::INFINITY,
        });
    }
    let mut segments = vec![first];
    let mut total = first.value;
    let mut total_err = first.error;
    let mut subdivisions = 1;
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            return Ok(Integral {
                value: total,
                error: total_err,
            });
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::Quadrature {
                estimate: total,
                error_bound: total_err,
            });
        }
        let (worst, _) =
            segments
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, s)| {
                    if s.error > best.1 {
                        (i, s.error)
                    } else {
                        best
                    }
                });
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature {
                estimate: total,
                error_bound: total_err,
            });
        }
        let left = kronrod21(&f, seg.a, mid);
        let right = kronrod21(&f, mid, seg.b);
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::Quadrature {
                estimate: total,
                error_bound: f64::INFINITY,
            });
        }
        segments.push(left);
        segments.push(right);
        subdivisions += 1;
        // Re-sum so the total does not accumulate update drift.
        total = segments.iter().map(|s| s.value).sum();
        total_err = segments.iter().map(|s| s.error).sum();
    }
}

/// Integral of `f` over `[a, ∞)` via `y = a + u/(1-u)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    let g = |u: f64| {
        let one_minus = 1.0 - u;
        let y = a + u / one_minus;
        let v = f(y);
        if v == 0.0 {
            0.0
        } else {
            v / (one_minus * one_minus)
        }
    };
    integrate(g, 0.0, 1.0, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn erf_series(x: f64) -> f64 {
        // Maclaurin series, converges quickly for |x| <= 2.
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x * x / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn log_gamma_known_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!((log_gamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-13);
        assert!((log_gamma(0.5).unwrap() - PI.sqrt().ln()).abs() < 1e-13);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn log_gamma_matches_factorials_and_recurrence() {
        let mut ln_fact = 0.0f64;
        for k in 1..170u32 {
            // lnΓ(k+1) = ln k!
            ln_fact += (k as f64).ln();
            let v = log_gamma(k as f64 + 1.0).unwrap();
            assert!(
                (v - ln_fact).abs() <= 1e-12 * ln_fact.abs().max(1.0),
                "k={k}"
            );
        }
        for &x in &[1e-3, 0.01, 0.3, 1.7, 3.3, 12.5, 150.2, 1e4, 9.9e5] {
            // Γ(x+1) = x Γ(x)
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + f64::ln(x);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "x={x}");
        }
    }

    #[test]
    fn log_gamma_agrees_with_libm() {
        let mut x = 1e-3;
        while x < 1e6 {
            let ours = log_gamma(x).unwrap();
            let reference = libm::lgamma(x);
            assert!(
                (ours - reference).abs() <= 1e-12 * reference.abs().max(1.0),
                "x={x}"
            );
            x *= 1.37;
        }
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        let oracle = 0.5 * (1.0 + erf_series(1.0 / SQRT_2));
        assert!((std_normal_cdf(1.0) - oracle).abs() < 1e-14);
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        for &x in &[0.1, 0.7, 1.3, 2.9, 5.0, 8.5] {
            assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() < 1e-14);
            let oracle = 0.5 * (1.0 + erf_series(x / SQRT_2));
            if x <= 2.0 {
                assert!((std_normal_cdf(x) - oracle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normal_cdf_diff_tails() {
        let d = ln_normal_cdf_diff(-1.0, 1.0).exp();
        assert!((d - 0.682_689_492_137_085_9).abs() < 1e-14);
        // Far tail keeps relative precision.
        let far = ln_normal_cdf_diff(10.0, 11.0);
        let expected = (0.5 * (libm::erfc(10.0 / SQRT_2) - libm::erfc(11.0 / SQRT_2))).ln();
        assert!((far - expected).abs() < 1e-12);
        // Upper tail of Φ at 10 is 7.619853e-24; the tail beyond 11 is 2.5e-5 of it.
        assert!((far - (7.619_853e-24f64).ln()).abs() < 1e-4);
        assert_eq!(ln_normal_cdf_diff(1.0, 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn integrator_polynomial_and_gaussian() {
        let cfg = QuadratureConfig::default();
        let r = integrate(|x| x * x, 0.0, 3.0, &cfg).unwrap();
        assert!((r.value - 9.0).abs() < 1e-12);
        let g = integrate_to_infinity(|x| (-x * x).exp(), 0.0, &cfg).unwrap();
        assert!((g.value - 0.5 * PI.sqrt()).abs() < 1e-10);
        let tight = QuadratureConfig {
            rel_tol: 1e-15,
            abs_tol: 1e-300,
            max_subdivisions: 2,
        };
        assert!(matches!(
            integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, &tight),
            Err(Error::Quadrature { .. })
        ));
    }

    #[test]
    fn owen_q_limits() {
        let cfg = QuadratureConfig::default();
        let full = owen_q(3, f64::INFINITY, 0.0, f64::INFINITY, &cfg).unwrap();
        assert!((full.value - 1.0).abs() < 1e-9);
        let half = owen_q(3, 0.0, 0.0, f64::INFINITY, &cfg).unwrap();
        assert!((half.value - 0.5).abs() < 1e-9);
        assert!(owen_q(0, 1.0, 0.0, 1.0, &cfg).is_err());
        assert!(owen_q(3, 1.0, 0.0, 0.0, &cfg).is_err());
    }

    #[test]
    fn owen_q_matches_dense_trapezoid() {
        // f = 2: weight is y·exp(-y²/2).
        let cfg = QuadratureConfig::default();
        let q = owen_q(2, 1.0, 0.5, 2.0, &cfg).unwrap().value;
        let nodes = 1_000_000;
        let h = 2.0 / nodes as f64;
        let g = |y: f64| y * (-0.5 * y * y).exp() * std_normal_cdf(y / 2f64.sqrt() - 0.5);
        let mut sum = 0.5 * (g(0.0) + g(2.0));
        for k in 1..nodes {
            sum += g(k as f64 * h);
        }
        assert!((q - sum * h).abs() < 1e-8, "{q} vs {}", sum * h);
    }

    #[test]
    fn owen_q_complementary_symmetry_and_monotone() {
        let cfg = QuadratureConfig::default();
        for &(f, t, d) in &[
            (1u32, 0.7, 0.2),
            (3, -1.5, 0.4),
            (7, 2.0, -1.0),
            (20, 0.3, 0.9),
        ] {
            let a = owen_q(f, t, d, f64::INFINITY, &cfg).unwrap().value;
            let b = owen_q(f, -t, -d, f64::INFINITY, &cfg).unwrap().value;
            assert!((a + b - 1.0).abs() < 1e-8, "f={f}");
            let mut prev = 0.0;
            for r in [0.5, 1.0, 2.0, 4.0, 8.0] {
                let v = owen_q(f, t, d, r, &cfg).unwrap().value;
                assert!(v >= prev - 1e-14);
                prev = v;
            }
            let lo = owen_q(f, t - 0.5, d, 3.0, &cfg).unwrap().value;
            let hi = owen_q(f, t + 0.5, d, 3.0, &cfg).unwrap().value;
            assert!(hi >= lo);
        }
    }

    #[test]
    fn inv_chi_sq_mode_and_normalization() {
        let cfg = QuadratureConfig {
            rel_tol: 1e-11,
            abs_tol: 1e-14,
            max_subdivisions: 500,
        };
        // Mode at ν σ0² / (ν + 2).
        let mode = 4.0 / 6.0;
        let at = |s: f64| scaled_inv_chi_sq_logpdf(s, 4.0, 1.0).unwrap();
        assert!(at(mode) > at(mode - 1e-4) && at(mode) > at(mode + 1e-4));
        for &nu in &[1.0, 2.0, 5.0, 50.0] {
            for &s0 in &[0.1, 1.0, 10.0] {
                // Integrate in log σ² to cover the heavy right tail.
                let g = |u: f64| (scaled_inv_chi_sq_logpdf(u.exp(), nu, s0).unwrap() + u).exp();
                let lo = s0.ln() - 12.0;
                let hi = s0.ln() + 60.0 / nu.min(5.0) + 20.0;
                let total = integrate(g, lo, hi, &cfg).unwrap().value;
                assert!((total - 1.0).abs() < 1e-8, "nu={nu} s0={s0}: {total}");
            }
        }
        assert!(scaled_inv_chi_sq_logpdf(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn inv_chi_sq_direct_formula() {
        // ν = 1, σ0² = 1, σ² = 1: (1/2)^{1/2} / Γ(1/2) · e^{-1/2}
        let expected = (0.5f64.sqrt() / PI.sqrt() * (-0.5f64).exp()).ln();
        let v = scaled_inv_chi_sq_logpdf(1.0, 1.0, 1.0).unwrap();
        assert!((v - expected).abs() < 1e-12);
    }
}
