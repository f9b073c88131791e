//! Cache configuration and its flat `key=value` file format.
//!
//! ```text
//! # comment
//! policy = zipf            # lru | zipf
//! capacity_bytes = 5e8     # integer, or `inf`
//! capacity_days = 1.0      # alternative: days of offered traffic
//! capacity_objects = 1000  # alternative: object-count capacity, implies byte_accounting = false
//! kernel_fraction = 0.3333
//! managing_capacity = 100000   # integer or `inf`; default 10x expected resident objects
//! byte_accounting = true
//! occupancy_interval_s = 3600
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{span_days, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Lru,
    /// Kernel, accessory and managing parts.
    ZipfConstruction,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Lru => "lru",
            Policy::ZipfConstruction => "zipf",
        })
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lru" => Ok(Policy::Lru),
            "zipf" | "zipf_construction" | "zipf-construction" => Ok(Policy::ZipfConstruction),
            other => Err(Error::invalid("policy", format!("unknown policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capacity {
    /// Bytes, or objects when byte accounting is off.
    Units(u64),
    Unbounded,
    /// Days of offered traffic (`ν_out` volume), resolved against a trace.
    TrafficDays(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheConfig {
    pub capacity: Capacity,
    pub policy: Policy,
    /// Share of the capacity given to the kernel; the accessory gets the rest.
    pub kernel_fraction: f64,
    /// Upper bound on retained statistics entries; `None` is unbounded.
    pub managing_capacity: Option<usize>,
    /// When false every object counts as one unit of capacity.
    pub byte_accounting: bool,
    /// Trace-time spacing of occupancy samples; `0` disables sampling.
    pub occupancy_interval_s: f64,
    #[serde(skip)]
    managing_explicit: bool,
}

impl Default for CacheConfig {
    fn default() -> Self {
        CacheConfig {
            capacity: Capacity::Unbounded,
            policy: Policy::ZipfConstruction,
            kernel_fraction: 1.0 / 3.0,
            managing_capacity: None,
            byte_accounting: true,
            occupancy_interval_s: 3600.0,
            managing_explicit: false,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Format(format!("config key `{key}`: `{value}` is not a number")))
}

fn parse_count(key: &str, value: &str) -> Result<u64> {
    let v = parse_f64(key, value)?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(Error::Format(format!("config key `{key}`: `{value}` is not a non-negative integer")));
    }
    Ok(v as u64)
}

fn is_infinite(value: &str) -> bool {
    matches!(value.to_ascii_lowercase().as_str(), "inf" | "infinite" | "unbounded")
}

impl CacheConfig {
    pub fn new(policy: Policy, capacity: Capacity) -> Self {
        CacheConfig { policy, capacity, ..Default::default() }
    }

    /// Object-count capacity: sizes are ignored.
    pub fn objects(policy: Policy, objects: u64) -> Self {
        CacheConfig { byte_accounting: false, ..CacheConfig::new(policy, Capacity::Units(objects)) }
    }

    pub fn with_kernel_fraction(mut self, fraction: f64) -> Self {
        self.kernel_fraction = fraction;
        self
    }

    pub fn with_managing_capacity(mut self, entries: Option<usize>) -> Self {
        self.managing_capacity = entries;
        self.managing_explicit = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kernel_fraction > 0.0 && self.kernel_fraction < 1.0) {
            return Err(Error::OutOfRange { name: "kernel_fraction", value: self.kernel_fraction, min: 0.0, max: 1.0 });
        }
        match self.capacity {
            Capacity::Units(0) => return Err(Error::invalid("capacity", "must be positive")),
            Capacity::TrafficDays(d) if !(d > 0.0 && d.is_finite()) => {
                return Err(Error::invalid("capacity_days", "must be positive"))
            }
            _ => {}
        }
        if !(self.occupancy_interval_s >= 0.0) {
            return Err(Error::invalid("occupancy_interval_s", "must be non-negative"));
        }
        Ok(())
    }

    /// Parses the `key=value` format on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = CacheConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("config line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "policy" => cfg.policy = value.parse()?,
                "capacity_bytes" => {
                    cfg.capacity = if is_infinite(value) {
                        Capacity::Unbounded
                    } else {
                        Capacity::Units(parse_count(key, value)?)
                    }
                }
                "capacity_objects" => {
                    cfg.capacity = Capacity::Units(parse_count(key, value)?);
                    cfg.byte_accounting = false;
                }
                "capacity_days" => cfg.capacity = Capacity::TrafficDays(parse_f64(key, value)?),
                "kernel_fraction" => cfg.kernel_fraction = parse_f64(key, value)?,
                "managing_capacity" => {
                    cfg.managing_capacity =
                        if is_infinite(value) { None } else { Some(parse_count(key, value)? as usize) };
                    cfg.managing_explicit = true;
                }
                "byte_accounting" => {
                    cfg.byte_accounting = match value {
                        "true" | "1" | "yes" => true,
                        "false" | "0" | "no" => false,
                        _ => return Err(Error::Format(format!("config key `byte_accounting`: `{value}` is not a boolean"))),
                    }
                }
                "occupancy_interval_s" => cfg.occupancy_interval_s = parse_f64(key, value)?,
                other => return Err(Error::Format(format!("config line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Renders the configuration back into the file format.
    pub fn to_kv(&self) -> String {
        let capacity = match self.capacity {
            Capacity::Units(u) if self.byte_accounting => format!("capacity_bytes = {u}"),
            Capacity::Units(u) => format!("capacity_objects = {u}"),
            Capacity::Unbounded => "capacity_bytes = inf".to_string(),
            Capacity::TrafficDays(d) => format!("capacity_days = {d}"),
        };
        let managing = match (self.managing_explicit, self.managing_capacity) {
            (false, _) => String::new(),
            (true, None) => "managing_capacity = inf\n".to_string(),
            (true, Some(n)) => format!("managing_capacity = {n}\n"),
        };
        format!(
            "policy = {}\n{capacity}\nkernel_fraction = {}\n{managing}byte_accounting = {}\noccupancy_interval_s = {}\n",
            self.policy, self.kernel_fraction, self.byte_accounting, self.occupancy_interval_s
        )
    }

    /// Capacity in units, `None` when unbounded. Errors for an unresolved traffic-days capacity.
    pub fn capacity_units(&self) -> Result<Option<u64>> {
        match self.capacity {
            Capacity::Units(u) => Ok(Some(u)),
            Capacity::Unbounded => Ok(None),
            Capacity::TrafficDays(_) => Err(Error::invalid("capacity", "capacity_days must be resolved against a trace")),
        }
    }

    /// Fixes trace-dependent settings: a traffic-days capacity becomes a unit
    /// count and the default managing bound becomes 10x the expected number of
    /// resident objects.
    pub fn resolved_for(&self, records: &[TraceRecord]) -> Result<CacheConfig> {
        self.validate()?;
        let mut cfg = self.clone();
        let bytes = cfg.byte_accounting;
        let unit = |r: &TraceRecord| if bytes { r.size_bytes } else { 1 };
        if let Capacity::TrafficDays(days) = cfg.capacity {
            let span = span_days(records);
            if span <= 0.0 {
                return Err(Error::invalid("capacity_days", "trace spans zero time"));
            }
            let volume: u64 = records.iter().map(unit).sum();
            let units = (volume as f64 / span * days).round().max(1.0);
            cfg.capacity = Capacity::Units(units as u64);
        }
        if !cfg.managing_explicit {
            cfg.managing_capacity = match cfg.capacity {
                Capacity::Units(units) => {
                    let cacheable: Vec<u64> = records.iter().filter(|r| r.cacheable).map(unit).collect();
                    let mean = if cacheable.is_empty() {
                        1.0
                    } else {
                        cacheable.iter().sum::<u64>() as f64 / cacheable.len() as f64
                    };
                    Some(((units as f64 / mean) * 10.0).ceil().max(1024.0) as usize)
                }
                _ => None,
            };
            cfg.managing_explicit = true;
        }
        Ok(cfg)
    }
}
