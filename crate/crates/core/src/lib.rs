//! Multiple-population moment estimation.
//!
//! Per-population mean and variance estimates under very small sample sizes,
//! obtained by learning a shared prior over all populations (type-II maximum
//! likelihood) and then taking the per-population posterior mode. Two prior
//! families are provided: an independent uniform box ([`uni`]) and the
//! conjugate normal-inverse-chi-squared prior ([`nix`]).
//!
//! The crate also carries the classical baselines ([`estimators`]), a
//! Nelder–Mead maximizer ([`optim`]), a seeded Monte Carlo harness
//! ([`experiments`]), brute-force oracles ([`verify`]) and dataset/report I/O
//! ([`io`]).

// Negated comparisons below are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod io;
pub mod nix;
pub mod optim;
pub mod special;
pub mod stats;
pub mod uni;
pub mod verify;

pub use error::{Error, Result};
pub use estimators::{pooled_mean, pooled_variance, sample_estimate, sample_estimator_std};
pub use experiments::{BenchmarkOptions, BenchmarkResult, GroundTruth, SyntheticConfig};
pub use io::{DatasetFile, DatasetFormat};
pub use nix::{NixHyperparams, NixLearnOptions, NixPosterior, VarianceMode};
pub use optim::{OptimConfig, OptimResult};
pub use special::QuadratureConfig;
pub use stats::{ErrorReport, Method, MomentEstimate, PopulationSample, SufficientStats};
pub use uni::{UniHyperparams, UniLearnOptions, UniVariance};
