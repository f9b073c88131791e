//! Shared fixtures for the criterion benches.

use zcl_core::trace::{generate_synthetic_trace, SizeModel, SyntheticTrace, SyntheticWorkloadSpec};

/// A Zipf(0.8) workload of roughly `requests` requests over one day.
pub fn zipf_trace(requests: u64, universe: u64, seed: u64) -> SyntheticTrace {
    let spec = SyntheticWorkloadSpec {
        universe_size: universe,
        zipf_alpha: 0.8,
        clients: 100,
        per_client_rate: requests as f64 / 100.0,
        horizon_days: 1.0,
        cacheable_fraction: 0.6,
        size_model: SizeModel::default(),
        seed,
        ..Default::default()
    };
    generate_synthetic_trace(&spec).expect("valid bench workload")
}
