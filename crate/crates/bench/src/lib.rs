//! Criterion benchmarks for `starnoma-core`; see `benches/`.
