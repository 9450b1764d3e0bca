use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Ramp of the transported mass fraction from `rho_base` to `rho_upper`
/// over `horizon` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurriculumSchedule<T> {
    pub rho_base: T,
    pub rho_upper: T,
    pub horizon: u64,
}

impl<T: Scalar> CurriculumSchedule<T> {
    pub fn new(rho_base: T, rho_upper: T, horizon: u64) -> Result<Self> {
        if !(rho_base >= T::zero() && rho_base <= rho_upper && rho_upper <= T::one()) {
            return Err(Error::invalid(
                "schedule",
                format!("need 0 <= rho_base <= rho_upper <= 1, got {rho_base} and {rho_upper}"),
            ));
        }
        if horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        Ok(Self {
            rho_base,
            rho_upper,
            horizon,
        })
    }

    pub fn at(&self, t: u64) -> T {
        rho_schedule(t, self)
    }
}

impl<T: Scalar> Default for CurriculumSchedule<T> {
    fn default() -> Self {
        Self {
            rho_base: T::lit(0.1),
            rho_upper: T::one(),
            horizon: 1000,
        }
    }
}

/// `ρ(t) = ρ_base + (ρ_upper - ρ_base)·exp(-5 (1 - t/T)²)`, saturating at
/// `ρ_upper` for `t >= T` and kept inside `[ρ_base, ρ_upper] ⊆ [0, 1]`.
pub fn rho_schedule<T: Scalar>(t: u64, sched: &CurriculumSchedule<T>) -> T {
    let (lo, hi) = (sched.rho_base, sched.rho_upper);
    if t >= sched.horizon {
        return hi.max(T::zero()).min(T::one());
    }
    let frac = T::from_u64(t).unwrap() / T::from_u64(sched.horizon).unwrap();
    let ramp = (T::lit(-5.0) * (T::one() - frac).powi(2)).exp();
    (lo + (hi - lo) * ramp).max(lo).min(hi).max(T::zero()).min(T::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_is_exact() {
        let s = CurriculumSchedule::new(0.1, 0.3, 7).unwrap();
        assert_eq!(rho_schedule(7, &s), 0.3);
        assert_eq!(rho_schedule(1_000, &s), 0.3);
    }

    #[test]
    fn default_start_value() {
        let s = CurriculumSchedule::new(0.1, 1.0, 50).unwrap();
        let expected = 0.1 + 0.9 * (-5.0f64).exp();
        assert!((rho_schedule(0, &s) - expected).abs() < 1e-12);
        assert!((rho_schedule(0, &s) - 0.106064).abs() < 1e-6);
    }

    #[test]
    fn degenerate_schedule_is_constant() {
        let s = CurriculumSchedule::new(0.3, 0.3, 10).unwrap();
        for t in 0..20 {
            assert_eq!(rho_schedule(t, &s), 0.3);
        }
    }

    #[test]
    fn invalid_bounds() {
        assert!(CurriculumSchedule::new(0.5, 0.4, 10).is_err());
        assert!(CurriculumSchedule::new(-0.1, 0.4, 10).is_err());
        assert!(CurriculumSchedule::new(0.1, 1.1, 10).is_err());
        assert!(CurriculumSchedule::new(0.1, 0.4, 0).is_err());
    }
}
