//! Microbenchmark crate; see `benches/planner.rs`. Shared helpers for the
//! benchmarks live here.

use mortonrrt::{generate_synthetic, Scenario};

/// A mid-sized world the microbenchmarks agree on.
pub fn bench_scenario() -> Scenario {
    generate_synthetic(100.0, 20, 10, 7).expect("valid parameters")
}
