//! `zcl model`: each analytic operation as a subcommand printing JSON.

use clap::{Args, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use zcl_core::analytics::{
    alpha_from_special_points, alpha_growth_constant, compute_cacheable_fraction, renewal_observables, SpecialPoints,
};
use zcl_core::model::{
    expected_hit_ratio, hit_scaling, ideal_hit_ratio, ideal_hit_ratio_with_renewal, kernel_accessory_ratio,
    kernel_size, special_point_residuals, wolman_hit_ratio, zipf_normalization, ChangeRate, RenewalModel, WolmanParams,
};

use crate::run::{parse_count, parse_days, parse_rate, CliError, CliResult, Run};

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    #[command(subcommand)]
    pub op: ModelOp,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum ModelOp {
    /// Normalization constant A of a Zipf law over p ranks.
    ZipfNorm(ZipfNormArgs),
    /// Aggregate hit ratio of an infinite cache with document changes.
    Wolman(WolmanArgs),
    /// Rank-dependent change rate.
    Mu(MuArgs),
    /// Upper bound on the hit ratio, optionally corrected for renewal.
    IdealHit(IdealHitArgs),
    /// Hit ratio of a kernel holding the most popular objects.
    ExpectedHit(ExpectedHitArgs),
    /// Power-law scaling of the hit ratio with cache size.
    HitScaling(HitScalingArgs),
    /// Kernel size in objects.
    KernelSize(KernelSizeArgs),
    /// Kernel to accessory size ratio.
    KernelRatio(KernelRatioArgs),
    /// Residuals of the renewal law at the special points.
    Residuals(ResidualsArgs),
    /// Zipf exponent from the special points.
    Alpha(AlphaArgs),
    /// Share of cacheable documents in the outgoing stream.
    CacheableFraction(CacheableFractionArgs),
    /// Renewal observables from the special points and a hit ratio.
    Renewal(RenewalArgs),
    /// Growth constant of the exponent between two windows.
    Growth(GrowthArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ZipfNormArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_parser = parse_count)]
    pub universe: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct WolmanArgs {
    #[arg(long, default_value = "100000", value_parser = parse_count)]
    pub universe: u64,
    #[arg(long, default_value_t = 0.8)]
    pub alpha: f64,
    /// Aggregate request rate, per day unless tagged.
    #[arg(long, default_value = "1e4/day", value_parser = parse_rate)]
    pub rate: f64,
    /// One change rate for every document, per day unless tagged.
    #[arg(long, value_parser = parse_rate)]
    pub mu: Option<f64>,
    #[arg(long, value_parser = parse_rate, requires_all = ["mu_unpopular", "cutoff"])]
    pub mu_popular: Option<f64>,
    #[arg(long, value_parser = parse_rate, requires_all = ["mu_popular", "cutoff"])]
    pub mu_unpopular: Option<f64>,
    /// Last rank that changes at the popular rate.
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Second exponent for the rank-dependent rate.
    #[arg(long, requires = "tst")]
    pub alpha_r: Option<f64>,
    /// Observation window for the rank-dependent rate, days unless suffixed.
    #[arg(long, value_parser = parse_days, requires = "alpha_r")]
    pub tst: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct MuArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub alpha_r: f64,
    /// Days unless suffixed.
    #[arg(long, value_parser = parse_days)]
    pub tst: f64,
    #[arg(long, default_value = "1000000", value_parser = parse_count)]
    pub universe: u64,
    /// Evaluate at rank quantile * p.
    #[arg(long, conflicts_with = "rank")]
    pub quantile: Option<f64>,
    #[arg(long)]
    pub rank: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct IdealHitArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub alpha_r: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExpectedHitArgs {
    #[arg(long, default_value_t = 1.0)]
    pub pc: f64,
    /// Exponent of the law, alpha or alpha_R.
    #[arg(long)]
    pub exponent: f64,
    #[arg(long, value_parser = parse_count)]
    pub universe: u64,
    /// Kernel size in objects.
    #[arg(long)]
    pub kernel: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct HitScalingArgs {
    #[arg(long)]
    pub h1: f64,
    #[arg(long)]
    pub s1: f64,
    #[arg(long)]
    pub s2: f64,
    #[arg(long)]
    pub alpha: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelSizeArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub hit_ratio: f64,
    /// Offered requests, per day unless tagged.
    #[arg(long, value_parser = parse_rate)]
    pub nu_out: f64,
    #[arg(long, value_parser = parse_days)]
    pub t_eff: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelRatioArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_parser = parse_days)]
    pub t_eff: f64,
    #[arg(long, value_parser = parse_days)]
    pub t_u: f64,
    #[arg(long, requires = "p")]
    pub m: Option<f64>,
    #[arg(long, requires = "m")]
    pub p: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ResidualsArgs {
    #[arg(long)]
    pub alpha_r: f64,
    #[arg(long)]
    pub k_r: f64,
    #[arg(long)]
    pub m: f64,
    #[arg(long)]
    pub p: f64,
    /// Normalization A; defaults to the Zipf normalization of alpha_R over p.
    #[arg(long)]
    pub norm: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct AlphaArgs {
    #[arg(long)]
    pub m: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub k: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CacheableFractionArgs {
    #[arg(long)]
    pub k: f64,
    #[arg(long, value_parser = parse_rate)]
    pub nu_out: f64,
    #[arg(long, value_parser = parse_days)]
    pub tst: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RenewalArgs {
    #[arg(long, value_parser = parse_count)]
    pub m: u64,
    #[arg(long, value_parser = parse_count)]
    pub p: u64,
    #[arg(long, value_parser = parse_count)]
    pub k: u64,
    /// All requests K, cacheable or not; defaults to k.
    #[arg(long, value_parser = parse_count)]
    pub total: Option<u64>,
    #[arg(long)]
    pub hit_ratio: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct GrowthArgs {
    #[arg(long)]
    pub alpha1: f64,
    #[arg(long, value_parser = parse_days)]
    pub t1: f64,
    #[arg(long)]
    pub alpha2: f64,
    #[arg(long, value_parser = parse_days)]
    pub t2: f64,
}

fn evaluate(op: &ModelOp) -> CliResult<Value> {
    Ok(match op {
        ModelOp::ZipfNorm(a) => json!({ "A": zipf_normalization(a.alpha, a.universe as f64)? }),
        ModelOp::Wolman(a) => {
            let change = match (a.mu, a.mu_popular, a.alpha_r) {
                (Some(mu), None, None) => ChangeRate::Constant(mu),
                (None, Some(popular), None) => ChangeRate::TwoValued {
                    popular,
                    unpopular: a.mu_unpopular.unwrap_or_default(),
                    cutoff: a.cutoff.unwrap_or_default(),
                },
                (None, None, Some(alpha_r)) => {
                    ChangeRate::RankDependent { alpha_r, t_st_days: a.tst.unwrap_or_default() }
                }
                _ => {
                    return Err(CliError::input(
                        "give exactly one of --mu, --mu-popular/--mu-unpopular/--cutoff, --alpha-r/--tst",
                    ))
                }
            };
            let params = WolmanParams { universe: a.universe as f64, alpha: a.alpha, request_rate: a.rate, change };
            json!({ "C_N": wolman_hit_ratio(&params)?, "C_zipf": params.zipf_integral() })
        }
        ModelOp::Mu(a) => {
            let model = RenewalModel::new(a.alpha, a.alpha_r, a.tst, a.universe as f64)?;
            let point = |mu: f64| json!({ "mu_per_day": mu, "period_days": 1.0 / mu });
            match (a.quantile, a.rank) {
                (Some(q), _) => point(model.mu_at_quantile(q)?),
                (None, Some(i)) => point(model.mu(i)?),
                (None, None) => json!({
                    "delta_alpha": model.delta_alpha(),
                    "unpopular": point(model.mu_unpopular()),
                    "popular": point(model.mu_popular()),
                }),
            }
        }
        ModelOp::IdealHit(a) => match a.alpha_r {
            None => json!({ "H_ideal": ideal_hit_ratio(a.alpha) }),
            Some(r) => json!({
                "H_ideal": ideal_hit_ratio(a.alpha),
                "H_ideal_renewal": ideal_hit_ratio_with_renewal(a.alpha, r)?,
            }),
        },
        ModelOp::ExpectedHit(a) => {
            json!({ "H": expected_hit_ratio(a.pc, a.exponent, a.universe as f64, a.kernel)? })
        }
        ModelOp::HitScaling(a) => json!({ "H2": hit_scaling(a.h1, a.s1, a.s2, a.alpha)? }),
        ModelOp::KernelSize(a) => json!({ "S_k": kernel_size(a.alpha, a.hit_ratio, a.nu_out, a.t_eff) }),
        ModelOp::KernelRatio(a) => {
            let sp = a.m.zip(a.p);
            serde_json::to_value(kernel_accessory_ratio(a.alpha, a.t_eff, a.t_u, sp)?)?
        }
        ModelOp::Residuals(a) => {
            let norm = match a.norm {
                Some(n) => n,
                None => zipf_normalization(a.alpha_r, a.p)?,
            };
            let r = special_point_residuals(norm, a.k_r, a.m, a.p, a.alpha_r);
            json!({ "A": norm, "r_M": r.at_m, "r_p": r.at_p })
        }
        ModelOp::Alpha(a) => json!({ "alpha": alpha_from_special_points(a.m, a.p, a.k)? }),
        ModelOp::CacheableFraction(a) => json!({ "p_c": compute_cacheable_fraction(a.k, a.nu_out, a.tst)? }),
        ModelOp::Renewal(a) => {
            let points = SpecialPoints { m: a.m, p: a.p, k: a.k, total_requests: a.total.unwrap_or(a.k) };
            serde_json::to_value(renewal_observables(&points, a.hit_ratio)?)?
        }
        ModelOp::Growth(a) => json!({ "C_growth": alpha_growth_constant(a.alpha1, a.t1, a.alpha2, a.t2)? }),
    })
}

pub fn model(args: &ModelArgs, run: &mut Run) -> CliResult {
    let result = evaluate(&args.op)?;
    let mut input = serde_json::to_value(&args.op)?;
    let op = input.as_object_mut().and_then(|m| m.remove("op")).unwrap_or(Value::Null);
    run.emit_json(None, &json!({ "op": op, "input": input, "result": result }))
}
