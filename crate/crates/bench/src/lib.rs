//! Benchmarks for `stit-core`; see `benches/`.
