//! Hit-ratio bounds, power-law scaling and kernel sizing.

use serde::{Deserialize, Serialize};

use super::zipf::{power_integral, zipf_normalization};
use super::{check_open_unit, check_positive};
use crate::error::{Error, Result};

/// Upper bound `2^((α−1)/α)` on the steady-state hit ratio of cacheable documents.
pub fn ideal_hit_ratio(alpha: f64) -> f64 {
    2f64.powf((alpha - 1.0) / alpha)
}

/// The bound corrected for renewal: `2^((α−1)/α) (1−α)/(1−α_R)`.
pub fn ideal_hit_ratio_with_renewal(alpha: f64, alpha_r: f64) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    if alpha_r == 1.0 {
        return Err(Error::invalid("alpha_r", "alpha_r = 1 makes the bound infinite"));
    }
    check_open_unit("alpha_r", alpha_r)?;
    Ok(ideal_hit_ratio(alpha) * (1.0 - alpha) / (1.0 - alpha_r))
}

/// `H = p_c ∫₁^{S_k} A x^-e dx` with `A` normalized over `universe` ranks.
///
/// Pass `α` as `exponent` for the ideal form, `α_R` for the form that
/// accounts for renewal.
pub fn expected_hit_ratio(cacheable_fraction: f64, exponent: f64, universe: f64, kernel_objects: f64) -> Result<f64> {
    if !(cacheable_fraction > 0.0 && cacheable_fraction <= 1.0) {
        return Err(Error::OutOfRange { name: "cacheable_fraction", value: cacheable_fraction, min: 0.0, max: 1.0 });
    }
    let norm = zipf_normalization(exponent, universe)?;
    if !(kernel_objects >= 1.0 && kernel_objects <= universe) {
        return Err(Error::OutOfRange { name: "kernel_objects", value: kernel_objects, min: 1.0, max: universe });
    }
    Ok(cacheable_fraction * norm * power_integral(exponent, kernel_objects))
}

/// Power-law scaling `H₂ = H₁ (S₂/S₁)^(1−α)`.
pub fn hit_scaling(h1: f64, s1: f64, s2: f64, alpha: f64) -> Result<f64> {
    check_positive("s1", s1)?;
    check_positive("s2", s2)?;
    Ok(h1 * (s2 / s1).powf(1.0 - alpha))
}

/// Kernel size in objects, `S_k = (1−α) H / 2 · ν_out · T_eff`.
pub fn kernel_size(alpha: f64, hit_ratio: f64, nu_out_per_day: f64, t_eff_days: f64) -> f64 {
    (1.0 - alpha) * hit_ratio / 2.0 * nu_out_per_day * t_eff_days
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelAccessoryRatio {
    /// `T_eff / ((2^(1/α) − 1) t_u)`
    pub analytic: f64,
    /// `M/(p−M) · T_eff/t_u`, when the special points are known.
    pub empirical: Option<f64>,
}

/// Both forms of the kernel:accessory size ratio `S_k/S_u`.
///
/// They coincide only when `p/M = 2^(1/α)`; measured profiles usually
/// violate that, so both are reported side by side.
pub fn kernel_accessory_ratio(
    alpha: f64,
    t_eff_days: f64,
    t_u_days: f64,
    special_points: Option<(f64, f64)>,
) -> Result<KernelAccessoryRatio> {
    check_open_unit("alpha", alpha)?;
    check_positive("t_u", t_u_days)?;
    let lifetime_ratio = t_eff_days / t_u_days;
    let analytic = lifetime_ratio / (2f64.powf(1.0 / alpha) - 1.0);
    let empirical = match special_points {
        None => None,
        Some((m, p)) => {
            if !(m > 0.0 && m < p) {
                return Err(Error::invalid("M", format!("need 0 < M < p, got M={m}, p={p}")));
            }
            Some(m / (p - m) * lifetime_ratio)
        }
    };
    Ok(KernelAccessoryRatio { analytic, empirical })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialPointResiduals {
    /// `A k_R / M^α_R − 2`
    pub at_m: f64,
    /// `A k_R / p^α_R − 1`
    pub at_p: f64,
}

/// How far a fitted `(A, k_R, α_R)` is from predicting `ϑ_M = 2` and `ϑ_p = 1`.
pub fn special_point_residuals(norm: f64, k_r: f64, m: f64, p: f64, alpha_r: f64) -> SpecialPointResiduals {
    let scale = norm * k_r;
    SpecialPointResiduals {
        at_m: scale / m.powf(alpha_r) - 2.0,
        at_p: scale / p.powf(alpha_r) - 1.0,
    }
}
