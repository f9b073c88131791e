//! Closed-form and integral cache models.
//!
//! Every rate here is per day; [`units`] converts tagged inputs.

mod hit;
pub mod quad;
mod renewal;
pub mod units;
mod wolman;
mod zipf;

pub use hit::{
    expected_hit_ratio, hit_scaling, ideal_hit_ratio, ideal_hit_ratio_with_renewal, kernel_accessory_ratio,
    kernel_size, special_point_residuals, KernelAccessoryRatio, SpecialPointResiduals,
};
pub use renewal::RenewalModel;
pub use wolman::{wolman_hit_ratio, ChangeRate, WolmanParams};
pub use zipf::{zipf_normalization, ZipfLaw};

use crate::error::{Error, Result};

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, min: 0.0, max: 1.0 })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {value}")))
    }
}
