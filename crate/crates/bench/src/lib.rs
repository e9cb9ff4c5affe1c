//! Criterion benchmarks for miv-cellkit; see `benches/`.
