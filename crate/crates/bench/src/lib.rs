//! Criterion benchmarks for msaw-core; see `benches/`.
