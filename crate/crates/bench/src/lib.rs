//! Criterion benchmarks for the extraction and normalization pipeline. See
//! `benches/`.
