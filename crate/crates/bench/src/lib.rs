//! Criterion benchmarks for `forge-core`; the targets live under `benches/`.
