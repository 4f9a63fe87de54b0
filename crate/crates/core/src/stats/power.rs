//! Sample size for comparing two proportions.

use super::fisher::Sidedness;
use super::StatsError;
use statrs::distribution::{ContinuousCDF, Normal};

/// Per-group n for a normal-approximation test of `p1 = p2` at level `alpha`
/// with the given power:
///
/// n = (z_α √(2 p̄ q̄) + z_β √(p₁q₁ + p₂q₂))² / (p₁ − p₂)²,
///
/// rounded up, where z_α uses α/2 when two-sided.
pub fn power_two_proportions(p1: f64, p2: f64, alpha: f64, power: f64, sidedness: Sidedness) -> Result<u64, StatsError> {
    let n = power_two_proportions_raw(p1, p2, alpha, power, sidedness)?;
    Ok(n.ceil() as u64)
}

/// The unrounded sample size.
pub fn power_two_proportions_raw(
    p1: f64,
    p2: f64,
    alpha: f64,
    power: f64,
    sidedness: Sidedness,
) -> Result<f64, StatsError> {
    for (name, v) in [("p1", p1), ("p2", p2)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(StatsError::InvalidInput(format!("{name} = {v} is not a probability")));
        }
    }
    for (name, v) in [("alpha", alpha), ("power", power)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(StatsError::InvalidInput(format!("{name} = {v} must lie in (0, 1)")));
        }
    }
    if p1 == p2 {
        return Err(StatsError::InvalidInput("p1 = p2: no effect to detect".into()));
    }
    let z = Normal::standard();
    let tail = match sidedness {
        Sidedness::TwoSided => alpha / 2.0,
        _ => alpha,
    };
    let z_a = z.inverse_cdf(1.0 - tail);
    let z_b = z.inverse_cdf(power);
    let pbar = (p1 + p2) / 2.0;
    let num = z_a * (2.0 * pbar * (1.0 - pbar)).sqrt() + z_b * (p1 * (1.0 - p1) + p2 * (1.0 - p2)).sqrt();
    Ok(num * num / ((p1 - p2) * (p1 - p2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let one = Sidedness::OneSidedGreater;
        assert_eq!(power_two_proportions(0.212, 0.229, 0.05, 0.80, one).unwrap(), 7353);
        assert_eq!(power_two_proportions(0.212, 0.229, 0.05, 0.80, Sidedness::TwoSided).unwrap(), 9335);
        assert_eq!(power_two_proportions(0.1, 0.9, 0.05, 0.80, one).unwrap(), 4);
        assert_eq!(power_two_proportions(0.3, 0.5, 0.05, 0.80, Sidedness::TwoSided).unwrap(), 93);
    }

    #[test]
    fn symmetric_and_validated() {
        let s = Sidedness::TwoSided;
        let a = power_two_proportions_raw(0.2, 0.3, 0.05, 0.9, s).unwrap();
        let b = power_two_proportions_raw(0.3, 0.2, 0.05, 0.9, s).unwrap();
        assert!((a - b).abs() < 1e-9);
        assert!(power_two_proportions(0.4, 0.4, 0.05, 0.8, s).is_err());
        assert!(power_two_proportions(0.4, 0.5, 0.0, 0.8, s).is_err());
        assert!(power_two_proportions(0.4, 1.5, 0.05, 0.8, s).is_err());
    }
}
