//! Event-ordered cache state machine.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::config::{CacheConfig, Policy};
use super::{Eviction, OccupancySample, SimulationResult};
use crate::error::{Error, Result};
use crate::trace::{GroundTruth, TraceRecord};
use crate::SECONDS_PER_DAY;

/// Where a resident object lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Kernel,
    Accessory,
    /// The single segment of the LRU baseline.
    Lru,
}

/// What happened to one request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Hit,
    /// Fetched from origin and stored.
    Miss,
    /// Resident but changed at the origin since it was fetched; refetched in place.
    Stale,
    /// Too large for the part it would be stored in; fetched, not stored.
    Bypass,
    Uncacheable,
}

impl Outcome {
    pub fn is_hit(self) -> bool {
        self == Outcome::Hit
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManagingEntry {
    /// Requests seen since the entry was created (`ϑ`).
    pub request_count: u64,
    pub first_request_time: f64,
    pub last_request_time: f64,
    pub last_fetch_time: f64,
    pub resident: bool,
}

/// Snapshot of the cache parts, for inspection and tests.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CacheState {
    pub kernel: BTreeSet<String>,
    pub accessory: BTreeSet<String>,
    pub lru: BTreeSet<String>,
    pub managing: BTreeMap<String, ManagingEntry>,
    pub kernel_units: u64,
    pub accessory_units: u64,
    pub lru_units: u64,
}

#[derive(Debug, Clone)]
struct Object {
    id: String,
    size: u64,
    part: Option<Part>,
    insert_time: f64,
    last_fetch_time: f64,
    /// Requests during the current residency, including the fetching one.
    residency_requests: u64,
    /// Ordering key inside the part (recency stamp or insertion stamp).
    order_key: u64,
    managed: bool,
    count: u64,
    first_request_time: f64,
    last_request_time: f64,
    last_request_seq: u64,
}

#[derive(Debug, Default, Clone)]
struct Counters {
    requests: u64,
    cacheable: u64,
    hits: u64,
    misses: u64,
    stale: u64,
    bypassed: u64,
    uncacheable: u64,
    bytes_total: u64,
    bytes_hit: u64,
}

/// Trace-driven cache simulator. Feed records in time order with
/// [`Simulator::step`], then call [`Simulator::finish`].
#[derive(Debug, Clone)]
pub struct Simulator<'g> {
    policy: Policy,
    byte_accounting: bool,
    capacity: Option<u64>,
    kernel_capacity: u64,
    accessory_capacity: u64,
    managing_capacity: Option<usize>,
    occupancy_interval_s: f64,
    ground_truth: Option<&'g GroundTruth>,

    index: HashMap<String, u32>,
    objects: Vec<Object>,
    /// LRU segment keyed by recency stamp.
    lru: BTreeMap<u64, u32>,
    /// Kernel ordered by (ϑ, last request stamp).
    kernel: BTreeSet<(u64, u64, u32)>,
    /// Accessory keyed by insertion stamp.
    accessory: BTreeMap<u64, u32>,
    /// Non-resident managing entries ordered by last request stamp.
    ghosts: BTreeSet<(u64, u32)>,
    managing_len: usize,
    lru_units: u64,
    kernel_units: u64,
    accessory_units: u64,

    seq: u64,
    first_time: Option<f64>,
    last_time: f64,
    next_sample: f64,
    counters: Counters,
    evictions: Vec<Eviction>,
    occupancy: Vec<OccupancySample>,
}

impl<'g> Simulator<'g> {
    /// Builds a simulator for a config whose capacity is already in units
    /// (see [`CacheConfig::resolved_for`]).
    pub fn new(config: &CacheConfig, ground_truth: Option<&'g GroundTruth>) -> Result<Self> {
        config.validate()?;
        let capacity = config.capacity_units()?;
        let (kernel_capacity, accessory_capacity) = match capacity {
            None => (u64::MAX, u64::MAX),
            Some(total) => {
                let kernel = (total as f64 * config.kernel_fraction).floor() as u64;
                (kernel, total - kernel)
            }
        };
        Ok(Simulator {
            policy: config.policy,
            byte_accounting: config.byte_accounting,
            capacity,
            kernel_capacity,
            accessory_capacity,
            managing_capacity: config.managing_capacity,
            occupancy_interval_s: config.occupancy_interval_s,
            ground_truth,
            index: HashMap::new(),
            objects: Vec::new(),
            lru: BTreeMap::new(),
            kernel: BTreeSet::new(),
            accessory: BTreeMap::new(),
            ghosts: BTreeSet::new(),
            managing_len: 0,
            lru_units: 0,
            kernel_units: 0,
            accessory_units: 0,
            seq: 0,
            first_time: None,
            last_time: f64::NEG_INFINITY,
            next_sample: f64::NEG_INFINITY,
            counters: Counters::default(),
            evictions: Vec::new(),
            occupancy: Vec::new(),
        })
    }

    /// Kernel and accessory capacities in units (both `u64::MAX` when unbounded).
    pub fn part_capacities(&self) -> (u64, u64) {
        (self.kernel_capacity, self.accessory_capacity)
    }

    /// Processes one request.
    pub fn step(&mut self, record: &TraceRecord) -> Result<Outcome> {
        let now = record.timestamp;
        if !now.is_finite() || now < 0.0 {
            return Err(Error::Format(format!("invalid timestamp {now}")));
        }
        if now < self.last_time {
            return Err(Error::Unordered { index: self.seq as usize, timestamp: now, previous: self.last_time });
        }
        self.last_time = now;
        self.first_time.get_or_insert(now);
        self.seq += 1;

        self.counters.requests += 1;
        self.counters.bytes_total += record.size_bytes;
        let outcome = if !record.cacheable {
            self.counters.uncacheable += 1;
            Outcome::Uncacheable
        } else {
            self.counters.cacheable += 1;
            let obj = self.intern(record);
            let outcome = match self.policy {
                Policy::Lru => self.step_lru(obj, now),
                Policy::ZipfConstruction => self.step_zipf(obj, now),
            };
            match outcome {
                Outcome::Hit => {
                    self.counters.hits += 1;
                    self.counters.bytes_hit += record.size_bytes;
                }
                Outcome::Miss => self.counters.misses += 1,
                Outcome::Stale => self.counters.stale += 1,
                Outcome::Bypass => self.counters.bypassed += 1,
                Outcome::Uncacheable => unreachable!(),
            }
            outcome
        };
        if self.occupancy_interval_s > 0.0 && now >= self.next_sample {
            self.sample(now);
            self.next_sample = now + self.occupancy_interval_s;
        }
        Ok(outcome)
    }

    fn intern(&mut self, record: &TraceRecord) -> u32 {
        if let Some(&i) = self.index.get(record.object_id.as_str()) {
            return i;
        }
        let i = self.objects.len() as u32;
        self.objects.push(Object {
            id: record.object_id.clone(),
            size: if self.byte_accounting { record.size_bytes.max(1) } else { 1 },
            part: None,
            insert_time: 0.0,
            last_fetch_time: 0.0,
            residency_requests: 0,
            order_key: 0,
            managed: false,
            count: 0,
            first_request_time: 0.0,
            last_request_time: 0.0,
            last_request_seq: 0,
        });
        self.index.insert(record.object_id.clone(), i);
        i
    }

    fn is_stale(&self, obj: u32, now: f64) -> bool {
        let o = &self.objects[obj as usize];
        match self.ground_truth.and_then(|g| g.last_change_at_or_before(&o.id, now)) {
            Some(change) => change > o.last_fetch_time,
            None => false,
        }
    }

    fn serve_resident(&mut self, obj: u32, now: f64) -> Outcome {
        let stale = self.is_stale(obj, now);
        let o = &mut self.objects[obj as usize];
        o.residency_requests += 1;
        if stale {
            o.last_fetch_time = now;
            Outcome::Stale
        } else {
            Outcome::Hit
        }
    }

    fn step_lru(&mut self, obj: u32, now: f64) -> Outcome {
        let seq = self.seq;
        if self.objects[obj as usize].part.is_some() {
            let outcome = self.serve_resident(obj, now);
            let o = &mut self.objects[obj as usize];
            self.lru.remove(&o.order_key);
            o.order_key = seq;
            self.lru.insert(seq, obj);
            return outcome;
        }
        let size = self.objects[obj as usize].size;
        let cap = self.capacity.unwrap_or(u64::MAX);
        if size > cap {
            return Outcome::Bypass;
        }
        while self.lru_units + size > cap {
            let (_, victim) = self.lru.pop_first().expect("occupied units imply residents");
            self.lru_units -= self.objects[victim as usize].size;
            self.log_eviction(victim, now);
        }
        self.lru.insert(seq, obj);
        self.lru_units += size;
        self.admit(obj, Part::Lru, seq, now);
        Outcome::Miss
    }

    fn admit(&mut self, obj: u32, part: Part, order_key: u64, now: f64) {
        let o = &mut self.objects[obj as usize];
        o.part = Some(part);
        o.order_key = order_key;
        o.insert_time = now;
        o.last_fetch_time = now;
        o.residency_requests = 1;
    }

    fn log_eviction(&mut self, victim: u32, now: f64) {
        let o = &mut self.objects[victim as usize];
        o.part = None;
        self.evictions.push(Eviction {
            object_id: o.id.clone(),
            insert_ts: o.insert_time,
            evict_ts: now,
            count: o.residency_requests,
        });
        o.residency_requests = 0;
        if o.managed {
            self.ghosts.insert((o.last_request_seq, victim));
        }
    }

    fn step_zipf(&mut self, obj: u32, now: f64) -> Outcome {
        let seq = self.seq;
        // managing statistics are updated before any placement decision
        let returning = {
            let o = &self.objects[obj as usize];
            o.managed && o.count >= 1
        };
        if self.objects[obj as usize].managed {
            let o = &self.objects[obj as usize];
            if o.part.is_none() {
                self.ghosts.remove(&(o.last_request_seq, obj));
            }
        } else {
            let o = &mut self.objects[obj as usize];
            o.managed = true;
            o.count = 0;
            o.first_request_time = now;
            self.managing_len += 1;
            self.trim_managing();
        }
        let (old_count, old_seq) = {
            let o = &mut self.objects[obj as usize];
            let old = (o.count, o.last_request_seq);
            o.count += 1;
            o.last_request_time = now;
            o.last_request_seq = seq;
            old
        };

        let outcome = match self.objects[obj as usize].part {
            Some(Part::Kernel) => {
                self.kernel.remove(&(old_count, old_seq, obj));
                let outcome = self.serve_resident(obj, now);
                let count = self.objects[obj as usize].count;
                self.kernel.insert((count, seq, obj));
                outcome
            }
            Some(Part::Accessory) => {
                let outcome = self.serve_resident(obj, now);
                self.promote(obj, now);
                outcome
            }
            Some(Part::Lru) => unreachable!("LRU segment is unused by the zipf construction"),
            None => {
                let target = if returning { Part::Kernel } else { Part::Accessory };
                if self.place(obj, target, now) {
                    let o = &mut self.objects[obj as usize];
                    o.insert_time = now;
                    o.last_fetch_time = now;
                    o.residency_requests = 1;
                    Outcome::Miss
                } else {
                    Outcome::Bypass
                }
            }
        };
        if self.objects[obj as usize].part.is_none() {
            self.ghosts.insert((seq, obj));
        }
        outcome
    }

    /// Moves a resident accessory object into the kernel, keeping it in the
    /// accessory if it cannot fit the kernel at all.
    fn promote(&mut self, obj: u32, now: f64) {
        let size = self.objects[obj as usize].size;
        if size > self.kernel_capacity {
            return;
        }
        let key = self.objects[obj as usize].order_key;
        self.accessory.remove(&key);
        self.accessory_units -= size;
        self.objects[obj as usize].part = None;
        let placed = self.place(obj, Part::Kernel, now);
        debug_assert!(placed);
    }

    /// Stores a non-resident object in `target`, evicting as needed.
    fn place(&mut self, obj: u32, target: Part, now: f64) -> bool {
        let size = self.objects[obj as usize].size;
        let seq = self.seq;
        match target {
            Part::Kernel => {
                if size > self.kernel_capacity {
                    return false;
                }
                while self.kernel_units + size > self.kernel_capacity {
                    let (_, _, victim) = self.kernel.pop_first().expect("occupied kernel");
                    self.kernel_units -= self.objects[victim as usize].size;
                    self.log_eviction(victim, now);
                }
                let count = self.objects[obj as usize].count;
                self.kernel.insert((count, seq, obj));
                self.kernel_units += size;
                let o = &mut self.objects[obj as usize];
                o.part = Some(Part::Kernel);
                o.order_key = seq;
            }
            Part::Accessory => {
                if size > self.accessory_capacity {
                    return false;
                }
                while self.accessory_units + size > self.accessory_capacity {
                    let (_, victim) = self.accessory.pop_first().expect("occupied accessory");
                    self.accessory_units -= self.objects[victim as usize].size;
                    self.log_eviction(victim, now);
                }
                self.accessory.insert(seq, obj);
                self.accessory_units += size;
                let o = &mut self.objects[obj as usize];
                o.part = Some(Part::Accessory);
                o.order_key = seq;
            }
            Part::Lru => unreachable!(),
        }
        true
    }

    fn trim_managing(&mut self) {
        let Some(limit) = self.managing_capacity else { return };
        while self.managing_len > limit {
            let Some((_, victim)) = self.ghosts.pop_first() else { break };
            let o = &mut self.objects[victim as usize];
            o.managed = false;
            o.count = 0;
            self.managing_len -= 1;
        }
    }

    fn sample(&mut self, now: f64) {
        let (kernel, accessory) = match self.policy {
            Policy::Lru => (self.lru_units, 0),
            Policy::ZipfConstruction => (self.kernel_units, self.accessory_units),
        };
        self.occupancy.push(OccupancySample {
            timestamp_s: now,
            kernel_units: kernel,
            accessory_units: accessory,
            managing_entries: self.managing_len as u64,
        });
    }

    pub fn part_of(&self, object_id: &str) -> Option<Part> {
        self.index.get(object_id).and_then(|&i| self.objects[i as usize].part)
    }

    /// Managing-part request count, `None` without an entry.
    pub fn request_count(&self, object_id: &str) -> Option<u64> {
        self.index
            .get(object_id)
            .map(|&i| &self.objects[i as usize])
            .filter(|o| o.managed)
            .map(|o| o.count)
    }

    pub fn managing_len(&self) -> usize {
        self.managing_len
    }

    pub fn evictions(&self) -> &[Eviction] {
        &self.evictions
    }

    pub fn snapshot(&self) -> CacheState {
        let mut state = CacheState {
            kernel_units: self.kernel_units,
            accessory_units: self.accessory_units,
            lru_units: self.lru_units,
            ..Default::default()
        };
        for o in &self.objects {
            match o.part {
                Some(Part::Kernel) => state.kernel.insert(o.id.clone()),
                Some(Part::Accessory) => state.accessory.insert(o.id.clone()),
                Some(Part::Lru) => state.lru.insert(o.id.clone()),
                None => false,
            };
            if o.managed {
                state.managing.insert(o.id.clone(), ManagingEntry {
                    request_count: o.count,
                    first_request_time: o.first_request_time,
                    last_request_time: o.last_request_time,
                    last_fetch_time: o.last_fetch_time,
                    resident: o.part.is_some(),
                });
            }
        }
        state
    }

    /// Verifies the structural invariants; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.kernel_units > self.kernel_capacity && self.policy == Policy::ZipfConstruction {
            return Err(format!("kernel {} > {}", self.kernel_units, self.kernel_capacity));
        }
        if self.accessory_units > self.accessory_capacity {
            return Err(format!("accessory {} > {}", self.accessory_units, self.accessory_capacity));
        }
        if let Some(cap) = self.capacity {
            if self.lru_units > cap {
                return Err(format!("lru {} > {cap}", self.lru_units));
            }
        }
        let (mut k, mut a, mut l) = (0u64, 0u64, 0u64);
        let mut managed = 0usize;
        for (i, o) in self.objects.iter().enumerate() {
            let i = i as u32;
            if o.managed {
                managed += 1;
            }
            match o.part {
                Some(Part::Kernel) => {
                    k += o.size;
                    if !self.kernel.contains(&(o.count, o.last_request_seq, i)) {
                        return Err(format!("{} missing from kernel index", o.id));
                    }
                    if o.count < 2 {
                        return Err(format!("kernel object {} has count {}", o.id, o.count));
                    }
                }
                Some(Part::Accessory) => {
                    a += o.size;
                    // objects too large for the kernel stay in the accessory when promoted
                    if o.count != 1 && o.size <= self.kernel_capacity {
                        return Err(format!("accessory object {} has count {}", o.id, o.count));
                    }
                }
                Some(Part::Lru) => l += o.size,
                None => {}
            }
            if o.part.is_some() && self.policy == Policy::ZipfConstruction && !o.managed {
                return Err(format!("resident {} has no managing entry", o.id));
            }
        }
        if (k, a, l) != (self.kernel_units, self.accessory_units, self.lru_units) {
            return Err("occupancy counters drifted".into());
        }
        if managed != self.managing_len {
            return Err("managing size drifted".into());
        }
        if self.kernel.len() + self.accessory.len() + self.lru.len()
            != self.objects.iter().filter(|o| o.part.is_some()).count()
        {
            return Err("part indexes drifted".into());
        }
        Ok(())
    }

    /// Closes the run and computes the measured quantities.
    pub fn finish(mut self) -> SimulationResult {
        if self.occupancy_interval_s > 0.0
            && self.first_time.is_some()
            && self.occupancy.last().map(|s| s.timestamp_s) != Some(self.last_time)
        {
            self.sample(self.last_time);
        }
        let c = &self.counters;
        let span_days = match self.first_time {
            Some(first) => (self.last_time - first) / SECONDS_PER_DAY,
            None => 0.0,
        };
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let fetched = c.requests - c.hits;
        let bytes_fetched = c.bytes_total - c.bytes_hit;
        let per_day = |x: f64| (span_days > 0.0).then(|| x / span_days);
        let kbps = |bytes: u64| (span_days > 0.0).then(|| bytes as f64 * 8.0 / 1000.0 / (span_days * SECONDS_PER_DAY));
        let mean_kb = |bytes: u64, n: u64| (n > 0).then(|| bytes as f64 / n as f64 / 1024.0);
        let int_units_per_day = if self.byte_accounting {
            per_day(bytes_fetched as f64)
        } else {
            per_day(fetched as f64)
        };
        SimulationResult {
            policy: self.policy,
            capacity_units: self.capacity,
            byte_accounting: self.byte_accounting,
            requests: c.requests,
            cacheable_requests: c.cacheable,
            hits: c.hits,
            misses: c.misses,
            stale_refetches: c.stale,
            bypassed: c.bypassed,
            uncacheable: c.uncacheable,
            bytes_total: c.bytes_total,
            bytes_hit: c.bytes_hit,
            hit_ratio: ratio(c.hits, c.requests),
            byte_hit_ratio: ratio(c.bytes_hit, c.bytes_total),
            mean_fetched_kbytes: mean_kb(bytes_fetched, fetched),
            mean_cached_kbytes: mean_kb(c.bytes_hit, c.hits),
            nu_out: per_day(c.requests as f64),
            nu_int: per_day(fetched as f64),
            nu_b_out_kbps: kbps(c.bytes_total),
            nu_b_int_kbps: kbps(bytes_fetched),
            s_eff_over_nu_int: match (self.capacity, int_units_per_day) {
                (Some(cap), Some(rate)) if rate > 0.0 => Some(cap as f64 / rate),
                _ => None,
            },
            t_st_days: span_days,
            evictions: self.evictions,
            occupancy: self.occupancy,
        }
    }
}
