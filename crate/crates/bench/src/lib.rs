//! Criterion benchmarks for the solver and certification kernels; see `benches/`.
