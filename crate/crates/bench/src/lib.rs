//! Criterion benchmarks for the estimator paths; see `benches/`.
