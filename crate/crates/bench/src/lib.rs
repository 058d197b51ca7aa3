//! Benchmark-only crate; see `benches/stages.rs`.
