//! Criterion benchmarks for the compile pipeline and the simulator. See
//! `benches/pipeline.rs`.
