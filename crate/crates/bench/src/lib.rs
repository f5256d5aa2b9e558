//! Criterion benchmarks for `dmmr-core`; see `benches/`.
