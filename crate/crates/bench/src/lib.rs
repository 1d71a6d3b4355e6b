//! Criterion benchmarks for the `amt-core` kernels; see `benches/kernels.rs`.
