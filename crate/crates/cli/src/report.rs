//! `zcl report`: figure data from simulate/analyze results and a profile.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::Value;
use zcl_core::analytics::{estimate_alpha, renewal_observables};
use zcl_core::model::{hit_scaling, zipf_normalization};
use zcl_core::PopularityProfile;

use crate::run::{CliError, CliResult, Run};

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// JSON outputs of `simulate` or `analyze`; arrays are flattened.
    pub results: Vec<PathBuf>,
    /// Ranked profile CSV from `analyze --profile-out`, for the rank plot.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Hit ratio for the renewal curve of the rank plot.
    #[arg(long)]
    pub hit_ratio: Option<f64>,
    /// Exponent of the scaling overlay on the hit-ratio series.
    #[arg(long, default_value_t = 0.77)]
    pub overlay_alpha: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    size: f64,
    h: Option<f64>,
    h_b: Option<f64>,
    t_u: Option<f64>,
    t_eff: Option<f64>,
}

fn collect(value: &Value, origin: &str, out: &mut Vec<Point>) -> CliResult {
    match value {
        Value::Array(items) => items.iter().try_for_each(|v| collect(v, origin, out)),
        Value::Object(map) => {
            let num = |k: &str| map.get(k).and_then(Value::as_f64);
            let size = num("S_eff/nu_int")
                .ok_or_else(|| CliError::input(format!("{origin}: result has no numeric `S_eff/nu_int`")))?;
            out.push(Point { size, h: num("H"), h_b: num("H_B"), t_u: num("t_u"), t_eff: num("T_eff") });
            Ok(())
        }
        _ => Err(CliError::input(format!("{origin}: expected a JSON object or array"))),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn io_err(path: &std::path::Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Internal(format!("{}: {e}", path.display()))
}

pub fn report(args: &ReportArgs, run: &mut Run) -> CliResult {
    let mut points = Vec::new();
    for path in &args.results {
        let text = run.read_to_string(path)?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        collect(&value, &path.display().to_string(), &mut points)?;
    }
    if points.is_empty() {
        return Err(CliError::input("empty result set"));
    }
    points.sort_by(|a, b| a.size.total_cmp(&b.size));

    let fig2 = args.out_dir.join("fig2.csv");
    let mut w = run.create(&fig2)?;
    writeln!(w, "S_eff/nu_int,t_u,T_eff").map_err(io_err(&fig2))?;
    for p in &points {
        writeln!(w, "{},{},{}", p.size, cell(p.t_u), cell(p.t_eff)).map_err(io_err(&fig2))?;
    }
    w.flush().map_err(io_err(&fig2))?;

    // scaling overlay anchored at the smallest size that has a hit ratio
    let anchor = points.iter().find(|p| p.h.is_some() && p.size > 0.0).map(|p| (p.size, p.h.unwrap_or_default()));
    let fig3 = args.out_dir.join("fig3.csv");
    let mut w = run.create(&fig3)?;
    writeln!(w, "S_eff/nu_int,H,H_B,H_scaling").map_err(io_err(&fig3))?;
    for p in &points {
        let model = match anchor {
            Some((s1, h1)) if p.size > 0.0 => Some(hit_scaling(h1, s1, p.size, args.overlay_alpha)?),
            _ => None,
        };
        writeln!(w, "{},{},{},{}", p.size, cell(p.h), cell(p.h_b), cell(model)).map_err(io_err(&fig3))?;
    }
    w.flush().map_err(io_err(&fig3))?;

    if let Some(path) = &args.profile {
        let bytes = run.read_bytes(path)?;
        let profile = PopularityProfile::read_csv(bytes.as_slice())?;
        let fig4 = args.out_dir.join("fig4.csv");
        let mut w = run.create(&fig4)?;
        w.write_all(rank_series(&profile, args.hit_ratio).as_bytes()).map_err(io_err(&fig4))?;
        w.flush().map_err(io_err(&fig4))?;
    }
    Ok(())
}

/// `log10 rank, log10 count` for the measured profile next to the ideal law
/// (`k A i^-α`) and the renewal law (`k_R A_R i^-α_R`).
fn rank_series(profile: &PopularityProfile, hit_ratio: Option<f64>) -> String {
    let points = profile.special_points();
    let p = points.p as f64;
    let ideal = estimate_alpha(&points).ok().and_then(|a| {
        let norm = zipf_normalization(a, p).ok()?;
        Some((a, norm * points.k as f64))
    });
    let renewal = hit_ratio.and_then(|h| {
        let obs = renewal_observables(&points, h).ok()?;
        let norm = zipf_normalization(obs.alpha_r, p).ok()?;
        Some((obs.alpha_r, norm * obs.k_r))
    });
    let curve = |law: Option<(f64, f64)>, rank: f64| law.map(|(a, scale)| (scale / rank.powf(a)).log10());
    let mut out = String::from("log_rank,log_count,log_ideal,log_renewal\n");
    for (i, count) in profile.counts().enumerate() {
        let rank = (i + 1) as f64;
        out += &format!(
            "{},{},{},{}\n",
            rank.log10(),
            (count as f64).log10(),
            cell(curve(ideal, rank)),
            cell(curve(renewal, rank))
        );
    }
    out
}
