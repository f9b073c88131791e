//! Trace-driven simulation of the kernel/accessory/managing cache
//! construction and an LRU baseline.
//!
//! The construction:
//!
//! - the **accessory** part admits first-time objects and evicts them in
//!   insertion order;
//! - a request for a resident accessory object promotes it to the
//!   **kernel**, which evicts the lowest request count first (ties by least
//!   recent request);
//! - the **managing** part keeps request statistics for objects after they
//!   leave the cache, so a returning object goes straight into the kernel.
//!   It is bounded by dropping the stalest non-resident entry.
//!
//! With change ground truth, a resident copy fetched before the object's
//! latest change is stale: the request is an updating request that refetches
//! in place and does not count as a hit.

mod config;
mod engine;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use config::{CacheConfig, Capacity, Policy};
pub use engine::{CacheState, ManagingEntry, Outcome, Part, Simulator};

use crate::analytics::MeasurementSummary;
use crate::error::{Error, Result};
use crate::trace::{check_ordered, GroundTruth, TraceRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eviction {
    pub object_id: String,
    pub insert_ts: f64,
    pub evict_ts: f64,
    /// Requests served during the residency, including the one that fetched it.
    pub count: u64,
}

impl Eviction {
    pub fn residence_days(&self) -> f64 {
        (self.evict_ts - self.insert_ts) / crate::SECONDS_PER_DAY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupancySample {
    pub timestamp_s: f64,
    /// Kernel occupancy; the whole cache for LRU.
    pub kernel_units: u64,
    pub accessory_units: u64,
    pub managing_entries: u64,
}

/// Measured quantities of one run. Units are bytes when byte accounting is
/// on, objects otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub policy: Policy,
    pub capacity_units: Option<u64>,
    pub byte_accounting: bool,
    pub requests: u64,
    pub cacheable_requests: u64,
    pub hits: u64,
    pub misses: u64,
    pub stale_refetches: u64,
    pub bypassed: u64,
    pub uncacheable: u64,
    pub bytes_total: u64,
    pub bytes_hit: u64,
    /// `H`
    pub hit_ratio: f64,
    /// `H^B`
    pub byte_hit_ratio: f64,
    /// `E(S)`, KByte
    pub mean_fetched_kbytes: Option<f64>,
    /// `E(C)`, KByte
    pub mean_cached_kbytes: Option<f64>,
    /// Offered requests per day.
    pub nu_out: Option<f64>,
    /// Requests per day forwarded to the origin.
    pub nu_int: Option<f64>,
    pub nu_b_out_kbps: Option<f64>,
    pub nu_b_int_kbps: Option<f64>,
    /// Capacity in days of origin traffic.
    pub s_eff_over_nu_int: Option<f64>,
    pub t_st_days: f64,
    pub evictions: Vec<Eviction>,
    pub occupancy: Vec<OccupancySample>,
}

impl SimulationResult {
    /// The run summarized with the primary-results column names.
    pub fn table1_row(&self) -> MeasurementSummary {
        MeasurementSummary {
            s_eff_over_nu_int: self.s_eff_over_nu_int,
            nu_out: self.nu_out,
            nu_int: self.nu_int,
            h: self.hit_ratio,
            nu_b_out: self.nu_b_out_kbps,
            nu_b_int: self.nu_b_int_kbps,
            h_b: self.byte_hit_ratio,
            e_c: self.mean_cached_kbytes,
            e_s: self.mean_fetched_kbytes,
            t_st: self.t_st_days,
        }
    }

    pub fn write_evictions_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["object_id", "insert_ts", "evict_ts", "count"])?;
        for e in &self.evictions {
            w.write_record([e.object_id.as_str(), &e.insert_ts.to_string(), &e.evict_ts.to_string(), &e.count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_occupancy_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["timestamp_s", "kernel_units", "accessory_units", "managing_entries"])?;
        for s in &self.occupancy {
            w.write_record([
                s.timestamp_s.to_string(),
                s.kernel_units.to_string(),
                s.accessory_units.to_string(),
                s.managing_entries.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Replays `records` through a cache built from `config`.
pub fn simulate(records: &[TraceRecord], config: &CacheConfig, ground_truth: Option<&GroundTruth>) -> Result<SimulationResult> {
    check_ordered(records)?;
    let config = config.resolved_for(records)?;
    let mut sim = Simulator::new(&config, ground_truth)?;
    for r in records {
        sim.step(r)?;
    }
    Ok(sim.finish())
}

/// Runs every config over the same stream, in config order.
pub fn compare_policies(
    records: &[TraceRecord],
    configs: &[CacheConfig],
    ground_truth: Option<&GroundTruth>,
) -> Result<Vec<SimulationResult>> {
    compare_policies_parallel(records, configs, ground_truth, 1)
}

/// As [`compare_policies`], fanning the runs out over up to `threads` threads.
/// Results come back in config order regardless of scheduling.
pub fn compare_policies_parallel(
    records: &[TraceRecord],
    configs: &[CacheConfig],
    ground_truth: Option<&GroundTruth>,
    threads: usize,
) -> Result<Vec<SimulationResult>> {
    if configs.is_empty() {
        return Err(Error::NoConfigs);
    }
    check_ordered(records)?;
    let threads = threads.clamp(1, configs.len());
    if threads == 1 {
        return configs.iter().map(|c| simulate(records, c, ground_truth)).collect();
    }
    let chunk = configs.len().div_ceil(threads);
    let results: Vec<Result<Vec<SimulationResult>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|c| simulate(records, c, ground_truth)).collect()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    });
    let mut out = Vec::with_capacity(configs.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
