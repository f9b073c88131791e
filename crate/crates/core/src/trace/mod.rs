//! Canonical request records and their sources.

mod canonical;
mod squid;
mod synth;

pub use canonical::{parse_canonical_csv, read_ground_truth_csv, write_canonical_csv, write_ground_truth_csv};
pub use squid::{parse_squid_log, CacheabilityRules, SquidParse};
pub use synth::{generate_synthetic_trace, GroundTruth, Renewal, SizeModel, SyntheticTrace, SyntheticWorkloadSpec, ZipfSampler};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One proxy request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Seconds since the trace epoch.
    pub timestamp: f64,
    pub client_id: String,
    pub object_id: String,
    pub size_bytes: u64,
    pub cacheable: bool,
    /// Whether the original proxy served the request from cache; only known
    /// for ingested logs that record HIT/MISS.
    pub origin_hit: Option<bool>,
}

impl TraceRecord {
    pub fn new(timestamp: f64, object_id: impl Into<String>, size_bytes: u64, cacheable: bool) -> Self {
        TraceRecord {
            timestamp,
            client_id: String::from("-"),
            object_id: object_id.into(),
            size_bytes: size_bytes.max(1),
            cacheable,
            origin_hit: None,
        }
    }
}

/// Stable-sorts records by timestamp so the stream is non-decreasing in time.
///
/// Squid logs completion times, so requests with long transfers can appear
/// slightly out of order.
pub fn canonicalize(records: &mut [TraceRecord]) {
    records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
}

/// Checks that timestamps are finite, non-negative and non-decreasing.
pub fn check_ordered(records: &[TraceRecord]) -> Result<()> {
    let mut previous = f64::NEG_INFINITY;
    for (index, r) in records.iter().enumerate() {
        if !r.timestamp.is_finite() || r.timestamp < 0.0 {
            return Err(Error::Format(format!(
                "record {index} has invalid timestamp {}",
                r.timestamp
            )));
        }
        if r.timestamp < previous {
            return Err(Error::Unordered {
                index,
                timestamp: r.timestamp,
                previous,
            });
        }
        previous = r.timestamp;
    }
    Ok(())
}

/// Span of the stream in days, `0` for fewer than two records.
pub fn span_days(records: &[TraceRecord]) -> f64 {
    match (records.first(), records.last()) {
        (Some(first), Some(last)) => (last.timestamp - first.timestamp) / crate::SECONDS_PER_DAY,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalize_is_stable() {
        let mut records = vec![
            TraceRecord::new(2.0, "a", 1, true),
            TraceRecord::new(1.0, "b", 1, true),
            TraceRecord::new(2.0, "c", 1, true),
        ];
        canonicalize(&mut records);
        let ids: Vec<_> = records.iter().map(|r| r.object_id.as_str()).collect();
        assert_eq!(ids, ["b", "a", "c"]);
        check_ordered(&records).unwrap();
    }

    #[test]
    fn unordered_stream_is_rejected() {
        let records = vec![TraceRecord::new(2.0, "a", 1, true), TraceRecord::new(1.0, "b", 1, true)];
        assert!(matches!(check_ordered(&records), Err(Error::Unordered { index: 1, .. })));
    }

    #[test]
    fn zero_size_is_clamped() {
        assert_eq!(TraceRecord::new(0.0, "a", 0, true).size_bytes, 1);
    }
}
