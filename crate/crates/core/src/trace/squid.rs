//! Reader for the native Squid access-log layout:
//!
//! ```text
//! time elapsed client action/code bytes method URL ident hierarchy/from type
//! ```

use std::collections::HashMap;
use std::io::BufRead;

use super::TraceRecord;
use crate::error::{Error, Result};

const DEFAULT_HIT_PREFIXES: &[&str] = &[
    "TCP_HIT",
    "TCP_MEM_HIT",
    "TCP_IMS_HIT",
    "TCP_INM_HIT",
    "TCP_NEGATIVE_HIT",
    "TCP_OFFLINE_HIT",
    "TCP_REFRESH_HIT",
    "TCP_REFRESH_UNMODIFIED",
    "UDP_HIT",
];

/// Decides which logged requests could have been stored by the proxy.
///
/// A request is uncacheable when its action code contains one of
/// `uncacheable_action_markers`, or its method is listed in
/// `uncacheable_methods`. `action_overrides` pins individual action codes
/// and wins over both lists.
#[derive(Debug, Clone)]
pub struct CacheabilityRules {
    pub uncacheable_action_markers: Vec<String>,
    pub uncacheable_methods: Vec<String>,
    pub action_overrides: HashMap<String, bool>,
    pub hit_prefixes: Vec<String>,
}

impl Default for CacheabilityRules {
    fn default() -> Self {
        CacheabilityRules {
            uncacheable_action_markers: vec!["DENIED".into(), "TUNNEL".into()],
            uncacheable_methods: vec!["CONNECT".into(), "POST".into()],
            action_overrides: HashMap::new(),
            hit_prefixes: DEFAULT_HIT_PREFIXES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl CacheabilityRules {
    /// Parses a rules file of `key=value` lines on top of the defaults.
    ///
    /// Keys: `uncacheable_action`, `uncacheable_method`, `hit_prefix` (each
    /// appends), `cacheable.<ACTION>=true|false` (override), and `reset=<list>`
    /// which clears one of `actions`, `methods` or `hits` before appending.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = CacheabilityRules::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("rules line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim().to_string());
            match key {
                "uncacheable_action" => rules.uncacheable_action_markers.push(value),
                "uncacheable_method" => rules.uncacheable_methods.push(value.to_ascii_uppercase()),
                "hit_prefix" => rules.hit_prefixes.push(value),
                "reset" => match value.as_str() {
                    "actions" => rules.uncacheable_action_markers.clear(),
                    "methods" => rules.uncacheable_methods.clear(),
                    "hits" => rules.hit_prefixes.clear(),
                    other => return Err(Error::Format(format!("rules line {}: unknown reset target `{other}`", lineno + 1))),
                },
                _ => match key.strip_prefix("cacheable.") {
                    Some(action) => {
                        let flag = parse_bool(&value)
                            .ok_or_else(|| Error::Format(format!("rules line {}: expected true/false", lineno + 1)))?;
                        rules.action_overrides.insert(action.to_string(), flag);
                    }
                    None => return Err(Error::Format(format!("rules line {}: unknown key `{key}`", lineno + 1))),
                },
            }
        }
        Ok(rules)
    }

    pub fn is_cacheable(&self, action: &str, method: &str) -> bool {
        if let Some(&flag) = self.action_overrides.get(action) {
            return flag;
        }
        let blocked_action = self.uncacheable_action_markers.iter().any(|m| action.contains(m.as_str()));
        let blocked_method = self.uncacheable_methods.iter().any(|m| m.eq_ignore_ascii_case(method));
        !(blocked_action || blocked_method)
    }

    pub fn is_hit(&self, action: &str) -> bool {
        self.hit_prefixes.iter().any(|p| action.starts_with(p.as_str()))
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

#[derive(Debug, Clone, Default)]
pub struct SquidParse {
    pub records: Vec<TraceRecord>,
    pub malformed: usize,
}

/// Reads a Squid access log. Malformed lines are counted and skipped; a log
/// where more than half the non-blank lines are malformed (or none parse) is
/// rejected as the wrong format.
pub fn parse_squid_log<R: BufRead>(mut reader: R, rules: &CacheabilityRules) -> Result<SquidParse> {
    let mut out = SquidParse::default();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        let line = match std::str::from_utf8(&buf) {
            Ok(line) => line.trim(),
            Err(_) => {
                out.malformed += 1;
                continue;
            }
        };
        if line.is_empty() {
            continue;
        }
        match parse_line(line, rules) {
            Some(record) => out.records.push(record),
            None => out.malformed += 1,
        }
    }
    let total = out.records.len() + out.malformed;
    if out.records.is_empty() {
        return Err(Error::Format(format!("no Squid log records in {total} lines")));
    }
    if out.malformed * 2 > total {
        return Err(Error::Format(format!(
            "{} of {total} lines are not Squid access-log entries",
            out.malformed
        )));
    }
    Ok(out)
}

fn parse_line(line: &str, rules: &CacheabilityRules) -> Option<TraceRecord> {
    let mut fields = line.split_ascii_whitespace();
    let timestamp: f64 = fields.next()?.parse().ok()?;
    let _elapsed_ms: i64 = fields.next()?.parse().ok()?;
    let client = fields.next()?;
    let (action, _status) = fields.next()?.split_once('/')?;
    let bytes: u64 = fields.next()?.parse().ok()?;
    let method = fields.next()?;
    let url = fields.next()?;
    if !timestamp.is_finite() || timestamp < 0.0 || action.is_empty() {
        return None;
    }
    Some(TraceRecord {
        timestamp,
        client_id: client.to_string(),
        object_id: url.to_string(),
        size_bytes: bytes.max(1),
        cacheable: rules.is_cacheable(action, method),
        origin_hit: Some(rules.is_hit(action)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<SquidParse> {
        parse_squid_log(text.as_bytes(), &CacheabilityRules::default())
    }

    #[test]
    fn miss_line_maps_fields() {
        let p = parse("1000.5 120 10.0.0.1 TCP_MISS/200 8320 GET http://a/x.gif -\n").unwrap();
        assert_eq!(p.records.len(), 1);
        let r = &p.records[0];
        assert_eq!(r.timestamp, 1000.5);
        assert_eq!(r.size_bytes, 8320);
        assert_eq!(r.client_id, "10.0.0.1");
        assert_eq!(r.object_id, "http://a/x.gif");
        assert!(r.cacheable);
        assert_eq!(r.origin_hit, Some(false));
    }

    #[test]
    fn hit_line_sets_origin_hit() {
        let p = parse("1001.0 5 10.0.0.1 TCP_HIT/200 8320 GET http://a/x.gif -").unwrap();
        assert_eq!(p.records[0].origin_hit, Some(true));
        let p = parse("1001.0 5 10.0.0.1 TCP_MEM_HIT/200 8320 GET http://a/x.gif -").unwrap();
        assert_eq!(p.records[0].origin_hit, Some(true));
    }

    #[test]
    fn garbage_line_is_counted_not_fatal() {
        let mut text = String::new();
        for i in 0..10 {
            text.push_str(&format!("{}.0 1 c TCP_MISS/200 100 GET http://h/{i} -\n", 1000 + i));
            if i == 4 {
                text.push_str("###\n");
            }
        }
        let p = parse(&text).unwrap();
        assert_eq!(p.records.len(), 10);
        assert_eq!(p.malformed, 1);
    }

    #[test]
    fn mostly_garbage_is_a_format_error() {
        let text = "a b c\nfoo\n1.0 1 c TCP_MISS/200 100 GET http://h/ -\n";
        assert!(matches!(parse(text), Err(Error::Format(_))));
        assert!(matches!(parse(""), Err(Error::Format(_))));
    }

    #[test]
    fn denied_and_tunnels_are_uncacheable() {
        let p = parse(
            "1.0 1 c TCP_DENIED/403 0 GET http://h/a -\n\
             2.0 1 c TCP_TUNNEL/200 900 CONNECT h:443 -\n\
             3.0 1 c TCP_MISS/200 900 CONNECT h:443 -\n",
        )
        .unwrap();
        assert!(p.records.iter().all(|r| !r.cacheable));
        assert_eq!(p.records[0].size_bytes, 1);
    }

    #[test]
    fn rules_file_overrides_defaults() {
        let rules = CacheabilityRules::parse("# local policy\nreset=methods\ncacheable.TCP_DENIED=true\nuncacheable_action=NONE\n").unwrap();
        assert!(rules.is_cacheable("TCP_DENIED", "GET"));
        assert!(rules.is_cacheable("TCP_MISS", "POST"));
        assert!(!rules.is_cacheable("NONE", "GET"));
        assert!(CacheabilityRules::parse("bogus").is_err());
    }
}
