//! Residence times measured by replaying a stream through the simulator.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::simcache::{simulate, CacheConfig, Eviction};
use crate::trace::{GroundTruth, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    /// Standard error of the mean; needs at least two samples.
    pub stderr: Option<f64>,
    pub samples: usize,
}

impl MeanEstimate {
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        let n = samples.len();
        if n == 0 {
            return None;
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let stderr = (n >= 2).then(|| {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        Some(MeanEstimate { mean, stderr, samples: n })
    }
}

/// Mean residence of evicted objects that saw exactly one request (`t_u`)
/// and exactly two (`T_eff`), in days.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LifetimeStats {
    pub t_u: Option<MeanEstimate>,
    pub t_eff: Option<MeanEstimate>,
}

impl LifetimeStats {
    /// `|t_u − T_eff|` in units of the pooled standard error, when both have one.
    pub fn separation(&self) -> Option<f64> {
        let (a, b) = (self.t_u?, self.t_eff?);
        let pooled = (a.stderr?.powi(2) + b.stderr?.powi(2)).sqrt();
        Some((a.mean - b.mean).abs() / pooled)
    }
}

pub fn lifetimes_from_evictions(evictions: &[Eviction]) -> LifetimeStats {
    let pick = |count: u64| -> Vec<f64> {
        evictions.iter().filter(|e| e.count == count).map(Eviction::residence_days).collect()
    };
    LifetimeStats {
        t_u: MeanEstimate::from_samples(&pick(1)),
        t_eff: MeanEstimate::from_samples(&pick(2)),
    }
}

/// Replays `records` through a cache and averages residence times of
/// evicted objects. A run with no evictions yields empty estimates.
pub fn measure_lifetimes(
    records: &[TraceRecord],
    config: &CacheConfig,
    ground_truth: Option<&GroundTruth>,
) -> Result<LifetimeStats> {
    let result = simulate(records, config, ground_truth)?;
    Ok(lifetimes_from_evictions(&result.evictions))
}
