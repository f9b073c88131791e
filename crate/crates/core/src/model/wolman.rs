//! Steady-state aggregate hit ratio of cacheable objects under document
//! change, after Wolman et al.
//!
//! ```text
//! C_N = ∫₁ⁿ 1/(C x^α) · 1/(1 + μ(x) C x^α / (λN)) dx,   C = ∫₁ⁿ x^-α dx
//! ```
//!
//! The rank-dependent variant substitutes the continuous-rank `μ(x)` of
//! [`RenewalModel`] into the integrand. That composition is this crate's
//! reading of "μ depends on popularity"; the original model only has the
//! two-valued form.

use serde::{Deserialize, Serialize};

use super::quad::{adaptive_simpson, SimpsonOptions};
use super::zipf::power_integral;
use super::{check_open_unit, check_positive, RenewalModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChangeRate {
    /// One rate for every document, per day.
    Constant(f64),
    /// `popular` for ranks `<= cutoff`, `unpopular` above.
    TwoValued { popular: f64, unpopular: f64, cutoff: f64 },
    /// `μ(x)` from the renewal model with exponents `(α, α_R)` over the same universe.
    RankDependent { alpha_r: f64, t_st_days: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WolmanParams {
    /// Universe size `n`.
    pub universe: f64,
    pub alpha: f64,
    /// Aggregate request rate `λN`, requests per day.
    pub request_rate: f64,
    pub change: ChangeRate,
}

impl WolmanParams {
    fn validate(&self) -> Result<()> {
        if !(self.universe >= 2.0 && self.universe.is_finite()) {
            return Err(Error::invalid("universe", "n must be >= 2"));
        }
        check_open_unit("alpha", self.alpha)?;
        check_positive("request_rate", self.request_rate)?;
        let ok = match self.change {
            ChangeRate::Constant(mu) => mu >= 0.0 && mu.is_finite(),
            ChangeRate::TwoValued { popular, unpopular, cutoff } => {
                popular >= 0.0 && unpopular >= 0.0 && popular.is_finite() && unpopular.is_finite() && cutoff >= 0.0
            }
            ChangeRate::RankDependent { alpha_r, t_st_days } => {
                RenewalModel::new(self.alpha, alpha_r, t_st_days, self.universe).is_ok()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("change", "change rates must be non-negative and finite"))
        }
    }

    /// `C = ∫₁ⁿ x^-α dx`.
    pub fn zipf_integral(&self) -> f64 {
        power_integral(self.alpha, self.universe)
    }

    /// `μ(x) · x^α`, which is smooth for every variant.
    fn scaled_rate(&self, x: f64) -> f64 {
        match self.change {
            ChangeRate::Constant(mu) => mu * x.powf(self.alpha),
            ChangeRate::TwoValued { popular, unpopular, cutoff } => {
                let mu = if x <= cutoff { popular } else { unpopular };
                mu * x.powf(self.alpha)
            }
            ChangeRate::RankDependent { alpha_r, t_st_days } => {
                let ratio = self.universe / x;
                let mu = ratio.powf(alpha_r) * ((self.alpha - alpha_r) * ratio.ln()).exp_m1() / t_st_days;
                mu * x.powf(self.alpha)
            }
        }
    }

    /// Integrand of `C_N` at continuous rank `x`.
    pub fn integrand(&self, x: f64) -> f64 {
        self.integrand_with(self.zipf_integral(), x)
    }

    fn integrand_with(&self, c: f64, x: f64) -> f64 {
        1.0 / (c * x.powf(self.alpha)) / (1.0 + self.scaled_rate(x) * c / self.request_rate)
    }
}

/// Aggregate object hit ratio `C_N` by adaptive Simpson quadrature to a
/// relative tolerance of `1e-8`.
pub fn wolman_hit_ratio(params: &WolmanParams) -> Result<f64> {
    params.validate()?;
    // integrate in u = ln x, where the power-law integrand is nearly flat
    let c = params.zipf_integral();
    let f = |u: f64| {
        let x = u.exp();
        params.integrand_with(c, x) * x
    };
    let top = params.universe.ln();
    let mut breaks = vec![0.0];
    if let ChangeRate::TwoValued { cutoff, .. } = params.change {
        if cutoff > 1.0 && cutoff < params.universe {
            breaks.push(cutoff.ln());
        }
    }
    breaks.push(top);
    let opts = SimpsonOptions::default();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += adaptive_simpson(f, w[0], w[1], opts)?.value;
    }
    Ok(total.clamp(0.0, 1.0))
}
