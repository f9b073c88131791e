//! The canonical trace CSV and the ground-truth change-event CSV.

use std::io::{Read, Write};

use super::{GroundTruth, TraceRecord};
use crate::error::{Error, Result};

const REQUIRED: [&str; 5] = ["timestamp_s", "client_id", "object_id", "size_bytes", "cacheable"];
const ORIGIN_HIT: &str = "origin_hit";

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Writes records with the canonical header. The `origin_hit` column is only
/// emitted when at least one record carries it.
pub fn write_canonical_csv<W: Write>(out: W, records: &[TraceRecord]) -> Result<()> {
    let with_hit = records.iter().any(|r| r.origin_hit.is_some());
    let mut w = writer(out);
    if with_hit {
        w.write_record(REQUIRED.iter().chain([&ORIGIN_HIT]))?;
    } else {
        w.write_record(REQUIRED)?;
    }
    for r in records {
        let ts = r.timestamp.to_string();
        let size = r.size_bytes.to_string();
        let cacheable = if r.cacheable { "true" } else { "false" };
        if with_hit {
            let hit = match r.origin_hit {
                Some(true) => "true",
                Some(false) => "false",
                None => "",
            };
            w.write_record([ts.as_str(), &r.client_id, &r.object_id, &size, cacheable, hit])?;
        } else {
            w.write_record([ts.as_str(), &r.client_id, &r.object_id, &size, cacheable])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_flag(s: &str, line: u64, column: &str) -> Result<bool> {
    match s {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(Error::Format(format!("line {line}: bad boolean `{s}` in column {column}"))),
    }
}

fn header_index(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

/// Reads a canonical trace CSV.
pub fn parse_canonical_csv<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = header_index(&headers, name).ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let hit_idx = header_index(&headers, ORIGIN_HIT);

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| row.get(i).unwrap_or("");
        let timestamp: f64 = field(idx[0])
            .parse()
            .map_err(|_| Error::Format(format!("line {line}: bad timestamp `{}`", field(idx[0]))))?;
        let size_bytes: u64 = field(idx[3])
            .parse()
            .map_err(|_| Error::Format(format!("line {line}: bad size `{}`", field(idx[3]))))?;
        if size_bytes == 0 {
            return Err(Error::Format(format!("line {line}: size_bytes must be positive")));
        }
        let origin_hit = match hit_idx.map(field) {
            None | Some("") => None,
            Some(s) => Some(parse_flag(s, line, ORIGIN_HIT)?),
        };
        records.push(TraceRecord {
            timestamp,
            client_id: field(idx[1]).to_string(),
            object_id: field(idx[2]).to_string(),
            size_bytes,
            cacheable: parse_flag(field(idx[4]), line, "cacheable")?,
            origin_hit,
        });
    }
    Ok(records)
}

/// Writes change events as `object_id,change_timestamp_s`, grouped by object
/// in ground-truth order.
pub fn write_ground_truth_csv<W: Write>(out: W, truth: &GroundTruth) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["object_id", "change_timestamp_s"])?;
    for (object, times) in truth.iter() {
        for t in times {
            w.write_record([object, t.to_string().as_str()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_ground_truth_csv<R: Read>(input: R) -> Result<GroundTruth> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    let obj = header_index(&headers, "object_id").ok_or_else(|| Error::MissingColumn("object_id".into()))?;
    let ts = header_index(&headers, "change_timestamp_s")
        .ok_or_else(|| Error::MissingColumn("change_timestamp_s".into()))?;
    let mut truth = GroundTruth::default();
    for row in reader.records() {
        let row = row?;
        let t: f64 = row
            .get(ts)
            .unwrap_or("")
            .parse()
            .map_err(|_| Error::Format(format!("bad change timestamp in {:?}", row)))?;
        truth.push_change(row.get(obj).unwrap_or(""), t);
    }
    truth.sort_events();
    Ok(truth)
}
