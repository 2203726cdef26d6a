//! Criterion benchmarks for the numeric kernels live under `benches/`.
//! Run them with `cargo bench -p labelnoise-bench`.
