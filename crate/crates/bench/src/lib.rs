//! Benchmarks for the finphase numerical kernels live under `benches/`.
