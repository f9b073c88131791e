//! Shared plumbing: error classes, the run manifest and file helpers.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use zcl_core::trace::{canonicalize, check_ordered, parse_canonical_csv, parse_squid_log, CacheabilityRules};
use zcl_core::TraceRecord;

pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input. Exit code 2.
    Input(String),
    /// Anything else. Exit code 1.
    Internal(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<zcl_core::Error> for CliError {
    fn from(err: zcl_core::Error) -> Self {
        if err.is_input_error() {
            CliError::Input(err.to_string())
        } else {
            CliError::Internal(err.to_string())
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Internal(format!("json: {err}"))
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// What a command touched. Rendered into the manifest.
#[derive(Debug, Default)]
pub struct Run {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
}

impl Run {
    pub fn read_to_string(&mut self, path: &Path) -> CliResult<String> {
        self.inputs.push(path.display().to_string());
        std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    pub fn read_bytes(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        self.inputs.push(path.display().to_string());
        let mut buf = Vec::new();
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Ok(buf)
    }

    /// Creates `path` for writing and lists it as an output.
    pub fn create(&mut self, path: &Path) -> CliResult<BufWriter<File>> {
        self.outputs.push(path.display().to_string());
        let f = File::create(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Ok(BufWriter::new(f))
    }

    /// Runs `body` against `path`, or stdout when there is no path.
    pub fn emit<F>(&mut self, path: Option<&Path>, body: F) -> CliResult
    where
        F: FnOnce(&mut dyn Write) -> CliResult,
    {
        match path {
            Some(p) => {
                let mut w = self.create(p)?;
                body(&mut w)?;
                w.flush().map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                body(&mut lock)?;
                lock.flush().map_err(|e| CliError::Internal(format!("stdout: {e}")))
            }
        }
    }

    pub fn emit_json<T: Serialize>(&mut self, path: Option<&Path>, value: &T) -> CliResult {
        let text = serde_json::to_string_pretty(value)?;
        self.emit(path, |w| {
            writeln!(w, "{text}").map_err(|e| CliError::Internal(format!("write: {e}")))
        })
    }

    /// Loads a trace, canonical CSV or Squid access log, and checks time order.
    pub fn load_trace(&mut self, path: &Path) -> CliResult<Vec<TraceRecord>> {
        let bytes = self.read_bytes(path)?;
        let records = if is_canonical(&bytes) {
            parse_canonical_csv(bytes.as_slice())?
        } else {
            let mut parsed = parse_squid_log(bytes.as_slice(), &CacheabilityRules::default())?;
            canonicalize(&mut parsed.records);
            parsed.records
        };
        check_ordered(&records)?;
        Ok(records)
    }
}

pub fn is_canonical(bytes: &[u8]) -> bool {
    bytes.starts_with(b"timestamp_s,")
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub outputs: Vec<String>,
    pub status: &'static str,
    pub exit_code: i32,
    pub error: Option<String>,
}

pub fn write_manifest(path: &PathBuf, manifest: &RunManifest) -> io::Result<()> {
    let text = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    std::fs::write(path, text + "\n")
}

/// Worker threads for fan-out, capped by `ZCL_THREADS`.
pub fn thread_cap() -> CliResult<usize> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("ZCL_THREADS") {
        Err(_) => Ok(available),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n.min(available)),
            _ => Err(CliError::input(format!("ZCL_THREADS must be a positive integer, got `{v}`"))),
        },
    }
}

/// Integer flag that also accepts float notation such as `1e5`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 => Ok(x as u64),
        _ => Err(format!("`{s}` is not a non-negative integer")),
    }
}

pub fn parse_rate(s: &str) -> Result<f64, String> {
    zcl_core::model::units::parse_rate_per_day(s).map_err(|e| e.to_string())
}

pub fn parse_days(s: &str) -> Result<f64, String> {
    zcl_core::model::units::parse_duration_days(s).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_float_notation() {
        assert_eq!(parse_count("100000"), Ok(100_000));
        assert_eq!(parse_count("1e5"), Ok(100_000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn error_classes() {
        let e: CliError = zcl_core::Error::EmptyProfile.into();
        assert_eq!(e.exit_code(), EXIT_INPUT);
        let e: CliError = zcl_core::Error::Quadrature { achieved: 1.0, subdivisions: 3 }.into();
        assert_eq!(e.exit_code(), EXIT_INTERNAL);
    }
}
