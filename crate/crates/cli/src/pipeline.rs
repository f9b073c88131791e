//! Trace-handling commands: ingest, synth, analyze, simulate.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use zcl_core::analytics::{
    build_popularity_profile, compute_cacheable_fraction, estimate_alpha, lifetimes_from_evictions, renewal_observables,
    MeanEstimate, Table2Row,
};
use zcl_core::model::{kernel_accessory_ratio, KernelAccessoryRatio};
use zcl_core::simcache::{compare_policies_parallel, simulate};
use zcl_core::trace::{
    canonicalize, generate_synthetic_trace, parse_canonical_csv, parse_squid_log, read_ground_truth_csv,
    write_canonical_csv, write_ground_truth_csv, CacheabilityRules, Renewal, SizeModel,
};
use zcl_core::{
    CacheConfig, Error, GroundTruth, LifetimeStats, MeasurementSummary, RenewalObservables, SimulationResult,
    SyntheticWorkloadSpec, TraceRecord, Window, SECONDS_PER_DAY,
};

use crate::run::{is_canonical, parse_count, parse_days, parse_rate, thread_cap, CliError, CliResult, Run};

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// Squid access log, or a canonical CSV to re-normalize.
    pub input: PathBuf,
    /// Canonical CSV output; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Cacheability rules file (key=value).
    #[arg(long)]
    pub rules: Option<PathBuf>,
}

pub fn ingest(args: &IngestArgs, run: &mut Run) -> CliResult {
    let rules = match &args.rules {
        Some(p) => CacheabilityRules::parse(&run.read_to_string(p)?)?,
        None => CacheabilityRules::default(),
    };
    let bytes = run.read_bytes(&args.input)?;
    let (mut records, malformed) = if is_canonical(&bytes) {
        (parse_canonical_csv(bytes.as_slice())?, 0)
    } else {
        let parsed = parse_squid_log(bytes.as_slice(), &rules)?;
        (parsed.records, parsed.malformed)
    };
    canonicalize(&mut records);
    run.emit(args.output.as_deref(), |w| Ok(write_canonical_csv(w, &records)?))?;
    eprintln!("{} records, {} malformed", records.len(), malformed);
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Distinct cacheable objects.
    #[arg(long, default_value = "100000", value_parser = parse_count)]
    pub universe: u64,
    #[arg(long, default_value_t = 0.8)]
    pub alpha: f64,
    #[arg(long, default_value = "100", value_parser = parse_count)]
    pub clients: u64,
    /// Requests per client, per day unless tagged (`/s`, `/h`).
    #[arg(long, default_value = "100", value_parser = parse_rate)]
    pub rate: f64,
    /// Horizon, days unless suffixed with `s` or `h`.
    #[arg(long, default_value = "10", value_parser = parse_days)]
    pub days: f64,
    #[arg(long, default_value_t = 1.0)]
    pub cacheable_fraction: f64,
    /// `none`, `two-valued:POPULAR,UNPOPULAR,CUTOFF` or `rank:ALPHA_R,T_ST_DAYS`.
    #[arg(long, default_value = "none")]
    pub renewal: String,
    /// `lognormal:MEAN_BYTES,SIGMA` or `const:BYTES`.
    #[arg(long, default_value = "lognormal:13312,1")]
    pub size: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Canonical CSV output; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Change events as `object_id,change_timestamp_s`.
    #[arg(long)]
    pub changes: Option<PathBuf>,
}

fn floats(text: &str, n: usize, what: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let values: Result<Vec<f64>, _> = parts.iter().map(|s| s.parse::<f64>()).collect();
    match values {
        Ok(v) if v.len() == n => Ok(v),
        _ => Err(CliError::input(format!("{what}: expected {n} comma-separated numbers, got `{text}`"))),
    }
}

pub fn parse_renewal(text: &str) -> CliResult<Renewal> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "none" if rest.is_empty() => Ok(Renewal::None),
        "two-valued" => {
            let v = floats(rest, 3, "--renewal two-valued")?;
            let cutoff = parse_count(&v[2].to_string()).map_err(CliError::input)?;
            Ok(Renewal::TwoValued { popular: v[0], unpopular: v[1], cutoff })
        }
        "rank" => {
            let v = floats(rest, 2, "--renewal rank")?;
            Ok(Renewal::RankDependent { alpha_r: v[0], t_st_days: v[1] })
        }
        _ => Err(CliError::input(format!("unknown renewal model `{text}`"))),
    }
}

pub fn parse_size_model(text: &str) -> CliResult<SizeModel> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "lognormal" => {
            let v = floats(rest, 2, "--size lognormal")?;
            Ok(SizeModel::LogNormal { mean_bytes: v[0], sigma: v[1] })
        }
        "const" => Ok(SizeModel::Constant(parse_count(rest).map_err(CliError::input)?)),
        _ => Err(CliError::input(format!("unknown size model `{text}`"))),
    }
}

pub fn synth(args: &SynthArgs, run: &mut Run) -> CliResult {
    run.seed = Some(args.seed);
    let spec = SyntheticWorkloadSpec {
        universe_size: args.universe,
        zipf_alpha: args.alpha,
        clients: u32::try_from(args.clients).map_err(|_| CliError::input("--clients is too large"))?,
        per_client_rate: args.rate,
        horizon_days: args.days,
        cacheable_fraction: args.cacheable_fraction,
        renewal: parse_renewal(&args.renewal)?,
        size_model: parse_size_model(&args.size)?,
        seed: args.seed,
    };
    let trace = generate_synthetic_trace(&spec)?;
    run.emit(args.output.as_deref(), |w| Ok(write_canonical_csv(w, &trace.records)?))?;
    if let Some(p) = &args.changes {
        let mut w = run.create(p)?;
        write_ground_truth_csv(&mut w, &trace.ground_truth)?;
        w.flush().map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))?;
    }
    eprintln!("{} records, {} change events", trace.records.len(), trace.ground_truth.total_events());
    Ok(())
}

fn load_changes(run: &mut Run, path: Option<&Path>) -> CliResult<Option<GroundTruth>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let bytes = run.read_bytes(p)?;
            Ok(Some(read_ground_truth_csv(bytes.as_slice())?))
        }
    }
}

fn load_config(run: &mut Run, path: &Path) -> CliResult<CacheConfig> {
    let text = run.read_to_string(path)?;
    CacheConfig::parse(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    pub trace: PathBuf,
    /// Analyze only the first DAYS of the trace.
    #[arg(long, value_name = "DAYS")]
    pub window_days: Option<f64>,
    /// Cache config; enables the simulated lifetimes and hit ratios.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Change ground truth for the simulation.
    #[arg(long)]
    pub changes: Option<PathBuf>,
    /// Measured hit ratio used for the renewal observables; overrides the simulated one.
    #[arg(long)]
    pub hit_ratio: Option<f64>,
    /// Writes the ranked profile as `rank,object_id,count`.
    #[arg(long)]
    pub profile_out: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeOutput {
    #[serde(flatten)]
    pub row: Table2Row,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    #[serde(rename = "H_B")]
    pub h_b: Option<f64>,
    pub renewal: Option<RenewalObservables>,
    pub kernel_accessory: Option<KernelAccessoryRatio>,
    pub warnings: Vec<String>,
}

fn windowed(records: &[TraceRecord], days: Option<f64>) -> CliResult<(Vec<TraceRecord>, Window)> {
    let full = Window::spanning(records).ok_or(Error::EmptyProfile)?;
    let window = match days {
        None => full,
        Some(d) if d > 0.0 && d.is_finite() => Window::new(full.start_s, full.start_s + d * SECONDS_PER_DAY)?,
        Some(d) => return Err(CliError::input(format!("--window-days must be positive, got {d}"))),
    };
    let inside = records.iter().filter(|r| window.contains(r.timestamp)).cloned().collect();
    Ok((inside, window))
}

fn warn(warnings: &mut Vec<String>, msg: String) {
    eprintln!("warning: {msg}");
    warnings.push(msg);
}

pub fn analyze(args: &AnalyzeArgs, run: &mut Run) -> CliResult {
    let records = run.load_trace(&args.trace)?;
    let (records, window) = windowed(&records, args.window_days)?;
    let profile = build_popularity_profile(&records, Some(window))?;
    let points = profile.special_points();
    let t_st = window.days();
    let mut warnings = Vec::new();

    let alpha = match estimate_alpha(&points) {
        Ok(a) => Some(a),
        Err(Error::UndefinedExponent) => {
            warn(&mut warnings, "no object was requested twice (M = 0); alpha is undefined".into());
            None
        }
        Err(e) => return Err(e.into()),
    };
    let p_c = if t_st > 0.0 {
        let nu_out = points.total_requests as f64 / t_st;
        Some(compute_cacheable_fraction(points.k as f64, nu_out, t_st)?)
    } else {
        warn(&mut warnings, "trace spans zero time; p_c is undefined".into());
        None
    };
    let mut row = Table2Row {
        alpha,
        p_c,
        m: points.m,
        p: points.p,
        k: points.k,
        total_requests: points.total_requests,
        t_st,
        ..Table2Row::default()
    };

    let mut sim = None;
    if let Some(cfg_path) = &args.config {
        let config = load_config(run, cfg_path)?;
        let truth = load_changes(run, args.changes.as_deref())?;
        let result = simulate(&records, &config, truth.as_ref())?;
        let life = lifetimes_from_evictions(&result.evictions);
        row.s_eff_over_nu_int = result.s_eff_over_nu_int;
        row.s_eff = result.capacity_units;
        fill_lifetimes(&mut row, &life);
        sim = Some(result);
    }

    let h = args.hit_ratio.or(sim.as_ref().map(|r| r.hit_ratio));
    let renewal = match h {
        Some(h) if points.m > 0 => match renewal_observables(&points, h) {
            Ok(obs) => Some(obs),
            Err(e) => {
                warn(&mut warnings, format!("renewal observables skipped: {e}"));
                None
            }
        },
        _ => None,
    };
    let kernel_accessory = match (alpha, row.t_u, row.t_eff) {
        (Some(a), Some(t_u), Some(t_eff)) if t_u > 0.0 && points.m < points.p => {
            Some(kernel_accessory_ratio(a, t_eff, t_u, Some((points.m as f64, points.p as f64)))?)
        }
        _ => None,
    };

    if let Some(p) = &args.profile_out {
        let mut w = run.create(p)?;
        profile.write_csv(&mut w)?;
        w.flush().map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))?;
    }
    let out = AnalyzeOutput {
        row,
        h,
        h_b: sim.as_ref().map(|r| r.byte_hit_ratio),
        renewal,
        kernel_accessory,
        warnings,
    };
    run.emit_json(args.output.as_deref(), &out)
}

fn fill_lifetimes(row: &mut Table2Row, life: &LifetimeStats) {
    let split = |m: Option<MeanEstimate>| (m.map(|m| m.mean), m.and_then(|m| m.stderr));
    (row.t_u, row.t_u_stderr) = split(life.t_u);
    (row.t_eff, row.t_eff_stderr) = split(life.t_eff);
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    pub trace: PathBuf,
    /// Cache config file; repeat to compare several over the same trace.
    #[arg(long, required = true)]
    pub config: Vec<PathBuf>,
    /// Change ground truth; stale copies become updating requests.
    #[arg(long)]
    pub changes: Option<PathBuf>,
    /// Eviction log CSV. With several configs, `.N` is inserted before the extension.
    #[arg(long)]
    pub evictions: Option<PathBuf>,
    /// Per-part occupancy CSV, numbered like `--evictions`.
    #[arg(long)]
    pub occupancy: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// One simulated configuration, with the primary-results column names.
#[derive(Debug, Serialize)]
pub struct SimulateOutput {
    pub config: String,
    #[serde(flatten)]
    pub summary: MeasurementSummary,
    pub policy: String,
    #[serde(rename = "S_eff")]
    pub s_eff: Option<u64>,
    pub byte_accounting: bool,
    pub requests: u64,
    pub cacheable_requests: u64,
    pub hits: u64,
    pub misses: u64,
    pub stale_refetches: u64,
    pub bypassed: u64,
    pub uncacheable: u64,
    pub bytes_total: u64,
    pub bytes_hit: u64,
    pub evictions: usize,
    pub t_u: Option<f64>,
    pub t_u_stderr: Option<f64>,
    #[serde(rename = "T_eff")]
    pub t_eff: Option<f64>,
    #[serde(rename = "T_eff_stderr")]
    pub t_eff_stderr: Option<f64>,
}

impl SimulateOutput {
    fn new(config: &CacheConfig, r: &SimulationResult) -> Self {
        let life = lifetimes_from_evictions(&r.evictions);
        SimulateOutput {
            config: config.to_kv(),
            summary: r.table1_row(),
            policy: r.policy.to_string(),
            s_eff: r.capacity_units,
            byte_accounting: r.byte_accounting,
            requests: r.requests,
            cacheable_requests: r.cacheable_requests,
            hits: r.hits,
            misses: r.misses,
            stale_refetches: r.stale_refetches,
            bypassed: r.bypassed,
            uncacheable: r.uncacheable,
            bytes_total: r.bytes_total,
            bytes_hit: r.bytes_hit,
            evictions: r.evictions.len(),
            t_u: life.t_u.map(|m| m.mean),
            t_u_stderr: life.t_u.and_then(|m| m.stderr),
            t_eff: life.t_eff.map(|m| m.mean),
            t_eff_stderr: life.t_eff.and_then(|m| m.stderr),
        }
    }
}

/// `out.csv` becomes `out.2.csv` for the third of several configs.
fn numbered(path: &Path, index: usize, total: usize) -> PathBuf {
    if total == 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{index}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{index}"),
    };
    path.with_file_name(name)
}

pub fn simulate_cmd(args: &SimulateArgs, run: &mut Run) -> CliResult {
    let records = run.load_trace(&args.trace)?;
    let configs = args.config.iter().map(|p| load_config(run, p)).collect::<CliResult<Vec<_>>>()?;
    let truth = load_changes(run, args.changes.as_deref())?;
    let results = compare_policies_parallel(&records, &configs, truth.as_ref(), thread_cap()?)?;

    let total = results.len();
    for (i, r) in results.iter().enumerate() {
        if let Some(p) = &args.evictions {
            let p = numbered(p, i, total);
            let mut w = run.create(&p)?;
            r.write_evictions_csv(&mut w)?;
            w.flush().map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))?;
        }
        if let Some(p) = &args.occupancy {
            let p = numbered(p, i, total);
            let mut w = run.create(&p)?;
            r.write_occupancy_csv(&mut w)?;
            w.flush().map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))?;
        }
    }
    let outputs: Vec<SimulateOutput> =
        configs.iter().zip(&results).map(|(c, r)| SimulateOutput::new(c, r)).collect();
    if outputs.len() == 1 {
        run.emit_json(args.output.as_deref(), &outputs[0])
    } else {
        run.emit_json(args.output.as_deref(), &outputs)
    }
}
