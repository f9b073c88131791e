//! Synthetic Zipf workloads with known popularity and renewal parameters.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};

use super::TraceRecord;
use crate::error::{Error, Result};
use crate::model::RenewalModel;
use crate::SECONDS_PER_DAY;

const SIZE_SALT: u64 = 0x5123_a1d7_9e37_79b9;
const CHANGE_SALT: u64 = 0x2545_f491_4f6c_dd1d;

/// How origin documents change over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Renewal {
    None,
    /// Rate `popular` (per day) for ranks `<= cutoff`, `unpopular` above it.
    TwoValued { popular: f64, unpopular: f64, cutoff: u64 },
    /// `μ(i)` from the rank-dependent renewal model with second exponent `alpha_r`.
    RankDependent { alpha_r: f64, t_st_days: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SizeModel {
    LogNormal { mean_bytes: f64, sigma: f64 },
    Constant(u64),
}

impl Default for SizeModel {
    fn default() -> Self {
        SizeModel::LogNormal {
            mean_bytes: 13.0 * 1024.0,
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticWorkloadSpec {
    /// Number of distinct cacheable objects `n`.
    pub universe_size: u64,
    pub zipf_alpha: f64,
    pub clients: u32,
    /// Requests per client per day.
    pub per_client_rate: f64,
    pub horizon_days: f64,
    pub cacheable_fraction: f64,
    pub renewal: Renewal,
    pub size_model: SizeModel,
    pub seed: u64,
}

impl Default for SyntheticWorkloadSpec {
    fn default() -> Self {
        SyntheticWorkloadSpec {
            universe_size: 100_000,
            zipf_alpha: 0.8,
            clients: 100,
            per_client_rate: 100.0,
            horizon_days: 10.0,
            cacheable_fraction: 1.0,
            renewal: Renewal::None,
            size_model: SizeModel::default(),
            seed: 0,
        }
    }
}

impl SyntheticWorkloadSpec {
    pub fn validate(&self) -> Result<()> {
        if self.universe_size == 0 {
            return Err(Error::invalid("universe_size", "must be positive"));
        }
        if !(self.zipf_alpha > 0.0 && self.zipf_alpha < 1.0) {
            return Err(Error::OutOfRange { name: "zipf_alpha", value: self.zipf_alpha, min: 0.0, max: 1.0 });
        }
        if self.clients == 0 {
            return Err(Error::invalid("clients", "must be positive"));
        }
        if !(self.per_client_rate > 0.0 && self.per_client_rate.is_finite()) {
            return Err(Error::invalid("per_client_rate", "must be positive"));
        }
        if !(self.horizon_days > 0.0 && self.horizon_days.is_finite()) {
            return Err(Error::invalid("horizon_days", "must be positive"));
        }
        if !(self.cacheable_fraction > 0.0 && self.cacheable_fraction <= 1.0) {
            return Err(Error::OutOfRange {
                name: "cacheable_fraction",
                value: self.cacheable_fraction,
                min: 0.0,
                max: 1.0,
            });
        }
        match self.renewal {
            Renewal::None => {}
            Renewal::TwoValued { popular, unpopular, .. } => {
                if !(popular >= 0.0 && unpopular >= 0.0 && popular.is_finite() && unpopular.is_finite()) {
                    return Err(Error::invalid("renewal", "change rates must be non-negative"));
                }
            }
            Renewal::RankDependent { alpha_r, t_st_days } => {
                if !(alpha_r > 0.0 && alpha_r <= self.zipf_alpha) {
                    return Err(Error::invalid("renewal", "alpha_r must lie in (0, zipf_alpha]"));
                }
                if !(t_st_days > 0.0) {
                    return Err(Error::invalid("renewal", "t_st_days must be positive"));
                }
            }
        }
        match self.size_model {
            SizeModel::LogNormal { mean_bytes, sigma } => {
                if !(mean_bytes >= 1.0 && sigma >= 0.0 && sigma.is_finite()) {
                    return Err(Error::invalid("size_model", "mean must be >= 1 byte, sigma >= 0"));
                }
            }
            SizeModel::Constant(0) => return Err(Error::invalid("size_model", "size must be positive")),
            SizeModel::Constant(_) => {}
        }
        Ok(())
    }

    /// Aggregate request rate `λN` in requests per day.
    pub fn total_rate(&self) -> f64 {
        self.per_client_rate * self.clients as f64
    }

    /// Size of the disjoint uncacheable universe.
    pub fn uncacheable_universe(&self) -> u64 {
        (self.universe_size / 10).max(1)
    }

    /// Change rate of the cacheable object at `rank` (1-based), per day.
    pub fn change_rate(&self, rank: u64) -> f64 {
        match self.renewal {
            Renewal::None => 0.0,
            Renewal::TwoValued { popular, unpopular, cutoff } => {
                if rank <= cutoff {
                    popular
                } else {
                    unpopular
                }
            }
            Renewal::RankDependent { alpha_r, t_st_days } => RenewalModel {
                alpha: self.zipf_alpha,
                alpha_r,
                t_st_days,
                universe: self.universe_size as f64,
            }
            .mu(rank as f64)
            .unwrap_or(0.0),
        }
    }

    /// Size of an object; fixed per object for the whole trace.
    pub fn object_size(&self, rank: u64, cacheable: bool) -> u64 {
        match self.size_model {
            SizeModel::Constant(bytes) => bytes,
            SizeModel::LogNormal { mean_bytes, sigma } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ SIZE_SALT);
                rng.set_stream(rank.wrapping_mul(2) + u64::from(!cacheable));
                let mu = mean_bytes.ln() - sigma * sigma / 2.0;
                let dist = LogNormal::new(mu, sigma).expect("validated size model");
                (dist.sample(&mut rng).round() as u64).max(1)
            }
        }
    }
}

/// Object identifier of a cacheable synthetic object.
pub fn cacheable_id(rank: u64) -> String {
    format!("o{rank}")
}

fn uncacheable_id(rank: u64) -> String {
    format!("u{rank}")
}

/// Inverse-CDF sampler over ranks `1..=n` with `P(i) ∝ i^-α`.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    cdf: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(n: u64, alpha: f64) -> Self {
        let mut cdf = Vec::with_capacity(n as usize);
        let mut acc = 0.0;
        for i in 1..=n {
            acc += (i as f64).powf(-alpha);
            cdf.push(acc);
        }
        for c in &mut cdf {
            *c /= acc;
        }
        ZipfSampler { cdf }
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    /// Maps a uniform draw in `[0, 1)` to a 1-based rank.
    pub fn rank_for(&self, u: f64) -> u64 {
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.cdf.len() - 1) as u64 + 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.rank_for(rng.gen::<f64>())
    }
}

/// Per-object change timestamps (seconds) known to the generator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    objects: Vec<(String, Vec<f64>)>,
    index: HashMap<String, usize>,
}

impl GroundTruth {
    pub fn push_change(&mut self, object_id: &str, timestamp: f64) {
        let slot = match self.index.get(object_id) {
            Some(&i) => i,
            None => {
                self.objects.push((object_id.to_string(), Vec::new()));
                self.index.insert(object_id.to_string(), self.objects.len() - 1);
                self.objects.len() - 1
            }
        };
        self.objects[slot].1.push(timestamp);
    }

    pub fn sort_events(&mut self) {
        for (_, times) in &mut self.objects {
            times.sort_by(f64::total_cmp);
        }
    }

    /// Change timestamps of one object in ascending order.
    pub fn changes(&self, object_id: &str) -> &[f64] {
        self.index.get(object_id).map_or(&[], |&i| &self.objects[i].1)
    }

    /// Latest change at or before `t`.
    pub fn last_change_at_or_before(&self, object_id: &str, t: f64) -> Option<f64> {
        let times = self.changes(object_id);
        let n = times.partition_point(|&c| c <= t);
        n.checked_sub(1).map(|i| times[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.objects.iter().map(|(id, t)| (id.as_str(), t.as_slice()))
    }

    pub fn total_events(&self) -> usize {
        self.objects.iter().map(|(_, t)| t.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_events() == 0
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticTrace {
    pub records: Vec<TraceRecord>,
    pub ground_truth: GroundTruth,
}

/// Generates a time-ordered trace: a merged Poisson arrival stream of rate
/// `λN`, Zipf object choice, and Poisson change events per object.
pub fn generate_synthetic_trace(spec: &SyntheticWorkloadSpec) -> Result<SyntheticTrace> {
    spec.validate()?;
    let horizon_s = spec.horizon_days * SECONDS_PER_DAY;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gap = Exp::new(spec.total_rate() / SECONDS_PER_DAY).expect("validated rate");
    let cacheable = ZipfSampler::new(spec.universe_size, spec.zipf_alpha);
    let uncacheable = (spec.cacheable_fraction < 1.0)
        .then(|| ZipfSampler::new(spec.uncacheable_universe(), spec.zipf_alpha));
    let mut sizes: HashMap<(u64, bool), u64> = HashMap::new();

    let mut records = Vec::with_capacity((spec.total_rate() * spec.horizon_days * 1.01) as usize + 16);
    let mut t = 0.0;
    loop {
        t += gap.sample(&mut rng);
        if t >= horizon_s {
            break;
        }
        let client = rng.gen_range(0..spec.clients);
        let is_cacheable = match &uncacheable {
            Some(_) => rng.gen::<f64>() < spec.cacheable_fraction,
            None => true,
        };
        let (rank, object_id) = match (&uncacheable, is_cacheable) {
            (Some(u), false) => {
                let rank = u.sample(&mut rng);
                (rank, uncacheable_id(rank))
            }
            _ => {
                let rank = cacheable.sample(&mut rng);
                (rank, cacheable_id(rank))
            }
        };
        let size_bytes = *sizes
            .entry((rank, is_cacheable))
            .or_insert_with(|| spec.object_size(rank, is_cacheable));
        records.push(TraceRecord {
            timestamp: t,
            client_id: format!("c{client}"),
            object_id,
            size_bytes,
            cacheable: is_cacheable,
            origin_hit: None,
        });
    }

    let mut ground_truth = GroundTruth::default();
    if spec.renewal != Renewal::None {
        for rank in 1..=spec.universe_size {
            let mu = spec.change_rate(rank);
            if mu <= 0.0 {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ CHANGE_SALT);
            rng.set_stream(rank);
            let exp = Exp::new(mu / SECONDS_PER_DAY).expect("positive rate");
            let id = cacheable_id(rank);
            let mut c = 0.0;
            loop {
                c += exp.sample(&mut rng);
                if c >= horizon_s {
                    break;
                }
                ground_truth.push_change(&id, c);
            }
        }
    }
    Ok(SyntheticTrace { records, ground_truth })
}
