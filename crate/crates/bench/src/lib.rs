//! Benchmark-only crate; see `benches/interpreter.rs`.
