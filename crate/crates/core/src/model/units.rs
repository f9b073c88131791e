//! Unit-tagged rate parsing. Values are normalized to per-day.

use crate::error::{Error, Result};
use crate::SECONDS_PER_DAY;

/// Parses `"<value>[/s|/sec|/h|/day|/d]"` into a per-day rate; an untagged
/// value is already per day.
pub fn parse_rate_per_day(text: &str) -> Result<f64> {
    let text = text.trim();
    let (number, unit) = match text.split_once('/') {
        Some((n, u)) => (n.trim(), u.trim()),
        None => (text, "day"),
    };
    let value: f64 = number
        .parse()
        .map_err(|_| Error::invalid("rate", format!("`{text}` is not a number")))?;
    let factor = match unit {
        "s" | "sec" | "second" => SECONDS_PER_DAY,
        "h" | "hour" => 24.0,
        "d" | "day" => 1.0,
        other => return Err(Error::invalid("rate", format!("unknown unit `/{other}`"))),
    };
    Ok(value * factor)
}

/// Parses a duration with an optional `s`, `h` or `d` suffix into days.
pub fn parse_duration_days(text: &str) -> Result<f64> {
    let text = text.trim();
    let (number, factor) = if let Some(n) = text.strip_suffix('s') {
        (n, 1.0 / SECONDS_PER_DAY)
    } else if let Some(n) = text.strip_suffix('h') {
        (n, 1.0 / 24.0)
    } else if let Some(n) = text.strip_suffix('d') {
        (n, 1.0)
    } else {
        (text, 1.0)
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| Error::invalid("duration", format!("`{text}` is not a number")))?;
    Ok(value * factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates() {
        assert_eq!(parse_rate_per_day("100").unwrap(), 100.0);
        assert_eq!(parse_rate_per_day("1/s").unwrap(), 86_400.0);
        assert_eq!(parse_rate_per_day("2/h").unwrap(), 48.0);
        assert_eq!(parse_rate_per_day("5/day").unwrap(), 5.0);
        assert!(parse_rate_per_day("5/week").is_err());
        assert!(parse_rate_per_day("x/s").is_err());
    }

    #[test]
    fn durations() {
        assert_eq!(parse_duration_days("15").unwrap(), 15.0);
        assert_eq!(parse_duration_days("15d").unwrap(), 15.0);
        assert_eq!(parse_duration_days("12h").unwrap(), 0.5);
        assert_eq!(parse_duration_days("43200s").unwrap(), 0.5);
    }
}
