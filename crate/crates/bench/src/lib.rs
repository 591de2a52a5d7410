//! Criterion benchmarks for the `multibase` kernels; see `benches/`.
