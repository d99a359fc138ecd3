//! Criterion benchmarks; run with `cargo bench -p latticeld-bench`.
