use serde::{Deserialize, Serialize};

use super::check_open_unit;
use crate::error::{Error, Result};

/// Continuous Zipf-like law `θ(x) = A / x^α` on ranks `[1, universe]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfLaw {
    pub alpha: f64,
    pub universe: f64,
    /// Normalization `A`.
    pub norm: f64,
}

/// `∫₁ᵇ x^-α dx` in closed form.
pub(crate) fn power_integral(alpha: f64, upper: f64) -> f64 {
    (upper.powf(1.0 - alpha) - 1.0) / (1.0 - alpha)
}

/// The `A` for which `∫₁ᵖ A x^-α dx = 1`.
pub fn zipf_normalization(alpha: f64, universe: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Err(Error::invalid("alpha", "alpha = 1 (harmonic case) is not supported"));
    }
    check_open_unit("alpha", alpha)?;
    if !(universe >= 2.0 && universe.is_finite()) {
        return Err(Error::invalid("universe", format!("must be >= 2, got {universe}")));
    }
    Ok((1.0 - alpha) / (universe.powf(1.0 - alpha) - 1.0))
}

impl ZipfLaw {
    pub fn normalized(alpha: f64, universe: f64) -> Result<Self> {
        Ok(ZipfLaw { alpha, universe, norm: zipf_normalization(alpha, universe)? })
    }

    /// Request probability of rank `i`.
    pub fn theta(&self, rank: f64) -> f64 {
        self.norm * rank.powf(-self.alpha)
    }

    /// `∫₁ᵘ A x^-α dx`, the probability mass of the first `upper` ranks.
    pub fn mass_up_to(&self, upper: f64) -> f64 {
        self.norm * power_integral(self.alpha, upper)
    }

    /// The `C` of the steady-state model: `∫₁ⁿ x^-α dx`.
    pub fn zipf_integral(&self) -> f64 {
        power_integral(self.alpha, self.universe)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::quad::{adaptive_simpson, SimpsonOptions};
    use proptest::prelude::*;

    #[test]
    fn half_alpha_on_four_ranks() {
        assert_eq!(zipf_normalization(0.5, 4.0).unwrap(), 0.5);
    }

    #[test]
    fn table_row_four_normalization() {
        // (1 - 0.81) / (607000^0.19 - 1)
        let a = zipf_normalization(0.81, 6.07e5).unwrap();
        assert!((a - 0.016_44).abs() < 5e-5, "{a}");
    }

    #[test]
    fn harmonic_and_out_of_range() {
        assert!(matches!(zipf_normalization(1.0, 10.0), Err(Error::InvalidParameter { .. })));
        assert!(zipf_normalization(0.0, 10.0).is_err());
        assert!(zipf_normalization(0.5, 1.0).is_err());
    }

    #[test]
    fn theta_strictly_decreasing() {
        let z = ZipfLaw::normalized(0.7, 1000.0).unwrap();
        for i in 1..999 {
            assert!(z.theta(i as f64) > z.theta((i + 1) as f64));
        }
        assert!((z.mass_up_to(1000.0) - 1.0).abs() < 1e-12);
        assert_eq!(z.mass_up_to(1.0), 0.0);
    }

    proptest! {
        #[test]
        fn normalized_density_integrates_to_one(alpha in 0.05f64..0.95, universe in 2.0f64..1e6) {
            let a = zipf_normalization(alpha, universe).unwrap();
            let r = adaptive_simpson(|x: f64| a * x.powf(-alpha), 1.0, universe, SimpsonOptions::default()).unwrap();
            prop_assert!((r.value - 1.0).abs() < 1e-7, "{}", r.value);
        }
    }
}
