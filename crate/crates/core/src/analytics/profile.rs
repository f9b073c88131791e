//! Ranked popularity list of cacheable objects.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::TraceRecord;
use crate::SECONDS_PER_DAY;

/// Observation window, inclusive at both ends, in trace seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start_s: f64,
    pub end_s: f64,
}

impl Window {
    pub fn new(start_s: f64, end_s: f64) -> Result<Self> {
        if !(start_s.is_finite() && end_s.is_finite() && start_s <= end_s) {
            return Err(Error::invalid("window", format!("[{start_s}, {end_s}] is not a valid interval")));
        }
        Ok(Window { start_s, end_s })
    }

    /// Window from the first to the last record.
    pub fn spanning(records: &[TraceRecord]) -> Option<Self> {
        Some(Window { start_s: records.first()?.timestamp, end_s: records.last()?.timestamp })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start_s && t <= self.end_s
    }

    pub fn days(&self) -> f64 {
        (self.end_s - self.start_s) / SECONDS_PER_DAY
    }

    /// Windows are closed, so touching endpoints count as overlap.
    pub fn overlaps(&self, other: &Window) -> bool {
        self.start_s <= other.end_s && other.start_s <= self.end_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedObject {
    pub object_id: String,
    pub count: u64,
    pub first_seen_s: f64,
}

/// `M`, `p`, `k` and the total request count `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialPoints {
    /// Last rank requested at least twice.
    pub m: u64,
    /// Unique cacheable objects.
    pub p: u64,
    /// Cacheable requests.
    pub k: u64,
    /// All requests, cacheable or not.
    pub total_requests: u64,
}

/// Cacheable objects in descending order of request count, ties in
/// first-seen order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityProfile {
    entries: Vec<RankedObject>,
    total_requests: u64,
    window: Option<Window>,
}

impl PopularityProfile {
    pub fn empty() -> Self {
        PopularityProfile { entries: Vec::new(), total_requests: 0, window: None }
    }

    /// Builds a profile directly from ranked counts, e.g. a published list.
    pub fn from_counts(counts: &[u64], total_requests: u64, window: Option<Window>) -> Result<Self> {
        let mut entries: Vec<RankedObject> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &count)| RankedObject { object_id: format!("rank{}", i + 1), count, first_seen_s: i as f64 })
            .collect();
        entries.sort_by_key(|e| std::cmp::Reverse(e.count));
        let profile = PopularityProfile { entries, total_requests, window };
        if profile.special_points().k > total_requests {
            return Err(Error::invalid("total_requests", "K must be at least k"));
        }
        Ok(profile)
    }

    pub fn entries(&self) -> &[RankedObject] {
        &self.entries
    }

    pub fn counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.count)
    }

    pub fn window(&self) -> Option<Window> {
        self.window
    }

    /// Observation window length in days, `0` for an empty profile.
    pub fn t_st_days(&self) -> f64 {
        self.window.map_or(0.0, |w| w.days())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn special_points(&self) -> SpecialPoints {
        SpecialPoints {
            m: self.entries.partition_point(|e| e.count >= 2) as u64,
            p: self.entries.len() as u64,
            k: self.entries.iter().map(|e| e.count).sum(),
            total_requests: self.total_requests,
        }
    }

    /// Writes `rank,object_id,count`, most popular first.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["rank", "object_id", "count"])?;
        for (i, e) in self.entries.iter().enumerate() {
            w.write_record([(i + 1).to_string().as_str(), &e.object_id, &e.count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the `rank,object_id,count` format back. The window is not
    /// stored, and `K` is taken to be `k`.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.into()));
        let (id_col, count_col) = (col("object_id")?, col("count")?);
        let mut entries = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let count: u64 = row[count_col]
                .parse()
                .map_err(|_| Error::Format(format!("profile row {}: bad count `{}`", i + 1, &row[count_col])))?;
            if count == 0 {
                return Err(Error::Format(format!("profile row {}: zero count", i + 1)));
            }
            entries.push(RankedObject { object_id: row[id_col].to_string(), count, first_seen_s: i as f64 });
        }
        if entries.is_empty() {
            return Err(Error::EmptyProfile);
        }
        let entries = Self::rank(entries);
        let total_requests = entries.iter().map(|e| e.count).sum();
        Ok(PopularityProfile { entries, total_requests, window: None })
    }

    fn rank(mut entries: Vec<RankedObject>) -> Vec<RankedObject> {
        // stable: equal keys keep their first-seen order
        entries.sort_by(|a, b| b.count.cmp(&a.count).then(a.first_seen_s.total_cmp(&b.first_seen_s)));
        entries
    }
}

/// Ranks the cacheable objects requested inside `window` (the whole stream
/// when `None`).
pub fn build_popularity_profile(records: &[TraceRecord], window: Option<Window>) -> Result<PopularityProfile> {
    let window = match window {
        Some(w) => w,
        None => Window::spanning(records).ok_or(Error::EmptyProfile)?,
    };
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut entries: Vec<RankedObject> = Vec::new();
    let mut total = 0u64;
    for r in records.iter().filter(|r| window.contains(r.timestamp)) {
        total += 1;
        if !r.cacheable {
            continue;
        }
        match index.get(r.object_id.as_str()) {
            Some(&i) => entries[i].count += 1,
            None => {
                index.insert(&r.object_id, entries.len());
                entries.push(RankedObject { object_id: r.object_id.clone(), count: 1, first_seen_s: r.timestamp });
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::EmptyProfile);
    }
    Ok(PopularityProfile { entries: PopularityProfile::rank(entries), total_requests: total, window: Some(window) })
}

/// Sums per-object counts of two profiles over disjoint windows and re-ranks.
pub fn merge_profiles(a: &PopularityProfile, b: &PopularityProfile) -> Result<PopularityProfile> {
    if let (Some(wa), Some(wb)) = (a.window, b.window) {
        if wa.overlaps(&wb) {
            return Err(Error::OverlappingWindows);
        }
    }
    // order sources by window start so ties resolve as a single pass would
    let (first, second) = match (a.window, b.window) {
        (Some(wa), Some(wb)) if wb.start_s < wa.start_s => (b, a),
        _ => (a, b),
    };
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut entries: Vec<RankedObject> = Vec::with_capacity(a.entries.len() + b.entries.len());
    for source in [first, second] {
        let mut by_first_seen: Vec<&RankedObject> = source.entries.iter().collect();
        by_first_seen.sort_by(|x, y| x.first_seen_s.total_cmp(&y.first_seen_s));
        for e in by_first_seen {
            match index.get(e.object_id.as_str()) {
                Some(&i) => {
                    entries[i].count += e.count;
                    entries[i].first_seen_s = entries[i].first_seen_s.min(e.first_seen_s);
                }
                None => {
                    index.insert(&e.object_id, entries.len());
                    entries.push(e.clone());
                }
            }
        }
    }
    let window = match (a.window, b.window) {
        (Some(wa), Some(wb)) => Some(Window { start_s: wa.start_s.min(wb.start_s), end_s: wa.end_s.max(wb.end_s) }),
        (w, None) | (None, w) => w,
    };
    Ok(PopularityProfile {
        entries: PopularityProfile::rank(entries),
        total_requests: a.total_requests + b.total_requests,
        window,
    })
}
