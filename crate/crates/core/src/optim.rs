//! Derivative-free maximization (Nelder–Mead with deterministic restarts).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    /// Iteration cap per restart.
    pub max_iters: usize,
    /// Simplex size (max-norm distance of any vertex from the best) at which a run stops.
    pub x_tol: f64,
    /// Objective spread across the simplex at which a run stops.
    pub f_tol: f64,
    /// Additional runs started from the incumbent with a fresh simplex.
    pub restarts: usize,
    /// Initial edge length relative to `max(|x_i|, 1)`.
    pub initial_simplex_scale: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            x_tol: 1e-8,
            f_tol: 1e-10,
            restarts: 2,
            initial_simplex_scale: 0.1,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0
            || !(self.x_tol > 0.0)
            || !(self.f_tol > 0.0)
            || !(self.initial_simplex_scale > 0.0)
        {
            return Err(Error::Config(format!("invalid optimizer config: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub point: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(iteration, best objective so far)` after every iteration.
    pub trace: Option<Vec<(usize, f64)>>,
}

impl OptimResult {
    /// Turns a non-converged result into [`Error::NotConverged`].
    pub fn into_converged(self) -> Result<Self> {
        if self.converged && self.objective.is_finite() {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                point: self.point,
                objective: self.objective,
                iterations: self.iterations,
                trace: self.trace.unwrap_or_default(),
            })
        }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

// Per-coordinate step multipliers for restart simplices.
const JITTER: [f64; 7] = [1.0, -0.7, 1.3, -1.1, 0.8, -1.4, 1.2];

struct Run {
    best: Vec<f64>,
    value: f64,
    converged: bool,
}

/// Maximizes `objective` starting from `init`.
///
/// The objective may return `-inf` to mark points outside its domain; NaN
/// is an error. The returned objective is never below `objective(init)`.
pub fn maximize<F>(objective: F, init: &[f64], cfg: &OptimConfig) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> f64,
{
    cfg.validate()?;
    if init.is_empty() {
        return Err(Error::Empty("optimizer needs at least one parameter"));
    }
    let eval = |x: &[f64]| -> Result<f64> {
        let v = objective(x);
        if v.is_nan() {
            Err(Error::NanObjective { point: x.to_vec() })
        } else {
            Ok(v)
        }
    };
    let f0 = eval(init)?;
    if f0.is_infinite() {
        return Err(Error::Domain(format!(
            "objective is not finite at the initial point {init:?}"
        )));
    }

    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut incumbent = init.to_vec();
    let mut incumbent_value = f0;
    let mut converged = false;
    for restart in 0..=cfg.restarts {
        let run = nelder_mead(
            &eval,
            &incumbent,
            incumbent_value,
            restart,
            cfg,
            &mut iterations,
            &mut trace,
        )?;
        converged = run.converged;
        if run.value > incumbent_value {
            incumbent = run.best;
            incumbent_value = run.value;
        }
    }
    Ok(OptimResult {
        point: incumbent,
        objective: incumbent_value,
        iterations,
        converged,
        trace: Some(trace),
    })
}

fn nelder_mead<E>(
    eval: &E,
    start: &[f64],
    start_value: f64,
    restart: usize,
    cfg: &OptimConfig,
    iterations: &mut usize,
    trace: &mut Vec<(usize, f64)>,
) -> Result<Run>
where
    E: Fn(&[f64]) -> Result<f64>,
{
    let dim = start.len();
    // Vertices carry the minimization value -f.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), -start_value));
    for i in 0..dim {
        let mut x = start.to_vec();
        let jitter = if restart == 0 {
            1.0
        } else {
            JITTER[(restart + i) % JITTER.len()]
        };
        x[i] += cfg.initial_simplex_scale * start[i].abs().max(1.0) * jitter;
        let v = -eval(&x)?;
        simplex.push((x, v));
    }
    let mut best_so_far = trace
        .last()
        .map_or(start_value, |&(_, v)| v.max(start_value));

    let mut converged = false;
    for _ in 0..cfg.max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0];
        let worst = &simplex[dim];
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let spread = worst.1 - best.1;
        if best.1.is_finite() && (size < cfg.x_tol || spread.abs() < cfg.f_tol) {
            converged = true;
            break;
        }
        *iterations += 1;

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let reflected = along(REFLECT);
        let fr = -eval(&reflected)?;
        if fr < simplex[0].1 {
            let expanded = along(EXPAND);
            let fe = -eval(&expanded)?;
            simplex[dim] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else {
            let outside = fr < simplex[dim].1;
            let contracted = along(if outside { CONTRACT } else { -CONTRACT });
            let fc = -eval(&contracted)?;
            let accept = if outside {
                fc <= fr
            } else {
                fc < simplex[dim].1
            };
            if accept {
                simplex[dim] = (contracted, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = anchor
                        .iter()
                        .zip(&vertex.0)
                        .map(|(a, v)| a + SHRINK * (v - a))
                        .collect();
                    let v = -eval(&x)?;
                    *vertex = (x, v);
                }
            }
        }
        let current = simplex
            .iter()
            .map(|v| -v.1)
            .fold(f64::NEG_INFINITY, f64::max);
        best_so_far = best_so_far.max(current);
        trace.push((*iterations, best_so_far));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (best, value) = simplex.swap_remove(0);
    Ok(Run {
        best,
        value: -value,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| -((x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2));
        let r = maximize(f, &[0.0, 0.0], &OptimConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.point[0] - 1.0).abs() < 1e-5 && (r.point[1] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| -((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let cfg = OptimConfig {
            max_iters: 5000,
            ..OptimConfig::default()
        };
        let r = maximize(f, &[-1.2, 1.0], &cfg).unwrap();
        assert!(
            (r.point[0] - 1.0).abs() < 1e-3 && (r.point[1] - 1.0).abs() < 1e-3,
            "{:?}",
            r.point
        );
    }

    #[test]
    fn plateau_converges() {
        let r = maximize(|_: &[f64]| 0.0, &[3.0, -1.0, 0.5], &OptimConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn nan_is_reported() {
        let f = |x: &[f64]| if x[0] > 0.05 { f64::NAN } else { -x[0] * x[0] };
        match maximize(f, &[0.0], &OptimConfig::default()) {
            Err(Error::NanObjective { point }) => assert!(point[0] > 0.05),
            other => panic!("expected NaN error, got {other:?}"),
        }
    }

    #[test]
    fn neg_infinity_marks_infeasible_region() {
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NEG_INFINITY
            } else {
                -(x[0] - 0.5).powi(2)
            }
        };
        let r = maximize(f, &[2.0], &OptimConfig::default()).unwrap();
        assert!((r.point[0] - 0.5).abs() < 1e-5);
        assert!(maximize(f, &[-1.0], &OptimConfig::default()).is_err());
    }

    #[test]
    fn never_worse_than_init_and_trace_monotone() {
        let f = |x: &[f64]| {
            (x[0] * 3.0).sin() + (x[1] * 2.0).cos() - 0.01 * (x[0] * x[0] + x[1] * x[1])
        };
        let init = [1.7, -0.4];
        let r = maximize(f, &init, &OptimConfig::default()).unwrap();
        assert!(r.objective >= f(&init));
        let trace = r.trace.unwrap();
        assert!(trace
            .windows(2)
            .all(|w| w[1].1 >= w[0].1 && w[1].0 > w[0].0));
    }

    #[test]
    fn deterministic() {
        let f =
            |x: &[f64]| -(x[0] - 0.3).powi(4) - (x[1] + x[0]).powi(2) - (x[2] * x[1]).sin().powi(2);
        let a = maximize(f, &[1.0, 1.0, 1.0], &OptimConfig::default()).unwrap();
        let b = maximize(f, &[1.0, 1.0, 1.0], &OptimConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn restarts_dominate_single_run() {
        let f = |x: &[f64]| {
            (x[0] * 5.0).sin() * (x[1] * 3.0).cos() - 0.05 * (x[0] * x[0] + x[1] * x[1])
        };
        let init = [2.3, 1.9];
        let single = maximize(
            f,
            &init,
            &OptimConfig {
                restarts: 0,
                ..OptimConfig::default()
            },
        )
        .unwrap();
        let multi = maximize(
            f,
            &init,
            &OptimConfig {
                restarts: 3,
                ..OptimConfig::default()
            },
        )
        .unwrap();
        assert!(multi.objective >= single.objective);
    }

    #[test]
    fn non_converged_result_becomes_error() {
        let f = |x: &[f64]| -((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let cfg = OptimConfig {
            max_iters: 3,
            restarts: 0,
            ..OptimConfig::default()
        };
        let r = maximize(f, &[-1.2, 1.0], &cfg).unwrap();
        assert!(!r.converged);
        assert!(matches!(
            r.into_converged(),
            Err(Error::NotConverged { iterations: 3, .. })
        ));
    }
}
