//! Criterion benchmarks for `projldp`; see `benches/numerics.rs`.
