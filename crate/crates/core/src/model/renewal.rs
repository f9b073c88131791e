use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rank-dependent document change rate.
///
/// Over a window `T_st` the ideal popularity `(p/i)^α` is depressed to
/// `(p/i)^α_R` by updating requests; the difference per day is the change
/// rate `μ(i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalModel {
    pub alpha: f64,
    pub alpha_r: f64,
    pub t_st_days: f64,
    /// Universe size `p`.
    pub universe: f64,
}

impl RenewalModel {
    pub fn new(alpha: f64, alpha_r: f64, t_st_days: f64, universe: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0 && alpha_r > 0.0 && alpha_r <= alpha) {
            return Err(Error::invalid("alpha_r", format!("need 0 < alpha_r <= alpha < 1, got alpha={alpha}, alpha_r={alpha_r}")));
        }
        if !(t_st_days > 0.0 && t_st_days.is_finite()) {
            return Err(Error::invalid("t_st_days", "must be positive"));
        }
        if !(universe >= 1.0 && universe.is_finite()) {
            return Err(Error::invalid("universe", "must be >= 1"));
        }
        Ok(RenewalModel { alpha, alpha_r, t_st_days, universe })
    }

    pub fn delta_alpha(&self) -> f64 {
        self.alpha - self.alpha_r
    }

    fn check_rank(&self, rank: f64) -> Result<()> {
        if rank >= 1.0 && rank <= self.universe {
            Ok(())
        } else {
            Err(Error::OutOfRange { name: "rank", value: rank, min: 1.0, max: self.universe })
        }
    }

    /// `μ(i) = ((p/i)^α − (p/i)^α_R) / T_st`, per day.
    pub fn mu(&self, rank: f64) -> Result<f64> {
        self.check_rank(rank)?;
        let ratio = self.universe / rank;
        // r^α − r^α_R factored as r^α_R (e^{Δα ln r} − 1) to avoid cancellation near i = p
        Ok(ratio.powf(self.alpha_r) * (self.delta_alpha() * ratio.ln()).exp_m1() / self.t_st_days)
    }

    /// The same rate written through `Δα`: `(1 − (i/p)^Δα) / ((i/p)^α T_st)`.
    pub fn mu_via_delta(&self, rank: f64) -> Result<f64> {
        self.check_rank(rank)?;
        let q = rank / self.universe;
        Ok(-(self.delta_alpha() * q.ln()).exp_m1() / (q.powf(self.alpha) * self.t_st_days))
    }

    /// `μ` at rank `quantile · p`.
    pub fn mu_at_quantile(&self, quantile: f64) -> Result<f64> {
        self.mu(quantile * self.universe)
    }

    /// Rate for unpopular documents, `μ(p/4)`.
    pub fn mu_unpopular(&self) -> f64 {
        self.mu_at_quantile(0.25).expect("p/4 is in range")
    }

    /// Rate for popular documents, `μ(p/100)`.
    pub fn mu_popular(&self) -> f64 {
        self.mu_at_quantile(0.01).expect("p/100 is in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table3() -> RenewalModel {
        RenewalModel::new(0.72, 0.70, 15.0, 1e6).unwrap()
    }

    #[test]
    fn unpopular_rate_is_one_per_202_days() {
        let mu = table3().mu_unpopular();
        assert!((mu * 202.0 - 1.0).abs() < 0.02, "1/{}", 1.0 / mu);
    }

    #[test]
    fn popular_rate_is_one_per_6_2_days() {
        let mu = table3().mu_popular();
        assert!((mu * 6.2 - 1.0).abs() < 0.02, "1/{}", 1.0 / mu);
    }

    #[test]
    fn rates_do_not_depend_on_universe_at_fixed_quantile() {
        let a = RenewalModel::new(0.72, 0.70, 15.0, 4e3).unwrap().mu_unpopular();
        let b = table3().mu_unpopular();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn equal_exponents_mean_no_change() {
        let m = RenewalModel::new(0.7, 0.7, 10.0, 1000.0).unwrap();
        for i in [1.0, 2.5, 100.0, 1000.0] {
            assert_eq!(m.mu(i).unwrap(), 0.0);
        }
    }

    #[test]
    fn last_rank_has_zero_rate() {
        assert_eq!(table3().mu(1e6).unwrap(), 0.0);
    }

    #[test]
    fn out_of_range_rank() {
        assert!(table3().mu(0.5).is_err());
        assert!(table3().mu(1e6 + 1.0).is_err());
        assert!(RenewalModel::new(0.7, 0.8, 10.0, 100.0).is_err());
    }

    proptest! {
        #[test]
        fn both_forms_agree(alpha in 0.05f64..0.95, frac in 0.0f64..1.0, q in 0.0f64..1.0, universe in 2.0f64..1e7, t in 0.1f64..100.0) {
            let m = RenewalModel::new(alpha, alpha * frac.max(1e-3), t, universe).unwrap();
            let rank = 1.0 + q * (universe - 1.0);
            let a = m.mu(rank).unwrap();
            let b = m.mu_via_delta(rank).unwrap();
            prop_assert!(a >= 0.0);
            let scale = a.abs().max(b.abs());
            if scale > 0.0 {
                prop_assert!((a - b).abs() <= 1e-12 * scale + 1e-300, "{} vs {}", a, b);
            }
        }
    }
}
