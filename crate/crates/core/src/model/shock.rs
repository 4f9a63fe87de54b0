//! Mean-zero preference shocks and their CDFs.

use crate::scalar::Real;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::ModelError;

/// Default shock scale, in payoff units.
pub const DEFAULT_SHOCK_SCALE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShockFamily {
    Logistic,
    Normal,
    Uniform,
}

impl ShockFamily {
    pub const ALL: [ShockFamily; 3] = [ShockFamily::Logistic, ShockFamily::Normal, ShockFamily::Uniform];
}

impl fmt::Display for ShockFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShockFamily::Logistic => "logistic",
            ShockFamily::Normal => "normal",
            ShockFamily::Uniform => "uniform",
        })
    }
}

impl FromStr for ShockFamily {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" => Ok(ShockFamily::Logistic),
            "normal" | "gaussian" => Ok(ShockFamily::Normal),
            "uniform" => Ok(ShockFamily::Uniform),
            other => Err(ModelError::UnknownShockFamily(other.to_string())),
        }
    }
}

/// Distribution of the idiosyncratic shock ε.
///
/// `scale` is the logistic scale, the normal standard deviation, or the
/// half-width of the uniform support `[-scale, scale]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "ShockRepr<T>",
    into = "ShockRepr<T>",
    bound = "T: Real + Serialize + serde::de::DeserializeOwned"
)]
pub struct ShockDistribution<T> {
    family: ShockFamily,
    scale: T,
}

impl<T: Real> ShockDistribution<T> {
    pub fn new(family: ShockFamily, scale: T) -> Result<Self, ModelError> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(ModelError::InvalidScale(scale.to_f64_lossy()));
        }
        Ok(Self { family, scale })
    }

    pub fn logistic(scale: T) -> Result<Self, ModelError> {
        Self::new(ShockFamily::Logistic, scale)
    }

    pub fn normal(sd: T) -> Result<Self, ModelError> {
        Self::new(ShockFamily::Normal, sd)
    }

    pub fn uniform(half_width: T) -> Result<Self, ModelError> {
        Self::new(ShockFamily::Uniform, half_width)
    }

    pub fn family(&self) -> ShockFamily {
        self.family
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    /// F(x) = Pr(ε ≤ x).
    pub fn cdf(&self, x: T) -> T {
        if x.is_nan() {
            return T::nan();
        }
        let z = x / self.scale;
        match self.family {
            ShockFamily::Logistic => {
                // Split by sign so exp never overflows.
                if z >= T::zero() {
                    T::one() / (T::one() + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (T::one() + e)
                }
            }
            ShockFamily::Normal => {
                let z = z.to_f64_lossy();
                T::from_f64_lossy(0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2))
            }
            ShockFamily::Uniform => {
                let two = T::one() + T::one();
                ((z + T::one()) / two).max(T::zero()).min(T::one())
            }
        }
    }

    /// Draw one shock.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match self.family {
            ShockFamily::Logistic => {
                let u = open_unit(rng);
                self.scale * T::from_f64_lossy((u / (1.0 - u)).ln())
            }
            ShockFamily::Normal => {
                let z: f64 = StandardNormal.sample(rng);
                self.scale * T::from_f64_lossy(z)
            }
            ShockFamily::Uniform => {
                let u: f64 = rng.random();
                self.scale * T::from_f64_lossy(2.0 * u - 1.0)
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ShockRepr<T> {
    family: ShockFamily,
    scale: T,
}

impl<T: Real> TryFrom<ShockRepr<T>> for ShockDistribution<T> {
    type Error = ModelError;

    fn try_from(r: ShockRepr<T>) -> Result<Self, Self::Error> {
        Self::new(r.family, r.scale)
    }
}

impl<T> From<ShockDistribution<T>> for ShockRepr<T> {
    fn from(d: ShockDistribution<T>) -> Self {
        Self {
            family: d.family,
            scale: d.scale,
        }
    }
}

impl<T: Real> Default for ShockDistribution<T> {
    fn default() -> Self {
        Self {
            family: ShockFamily::Logistic,
            scale: T::from_f64_lossy(DEFAULT_SHOCK_SCALE),
        }
    }
}

impl<T: Real> fmt::Display for ShockDistribution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.family, self.scale.to_f64_lossy())
    }
}

/// Uniform draw on the open interval (0, 1).
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symmetric_families_are_half_at_zero() {
        for fam in ShockFamily::ALL {
            let d = ShockDistribution::new(fam, 20.0).unwrap();
            assert!((d.cdf(0.0_f64) - 0.5).abs() < 1e-15, "{fam}");
        }
    }

    #[test]
    fn uniform_closed_form() {
        let d = ShockDistribution::uniform(1.0).unwrap();
        assert_eq!(d.cdf(-0.5), 0.25);
        assert_eq!(d.cdf(-3.0), 0.0);
        assert_eq!(d.cdf(3.0), 1.0);
    }

    #[test]
    fn limits() {
        for fam in ShockFamily::ALL {
            let d = ShockDistribution::new(fam, 20.0).unwrap();
            assert_eq!(d.cdf(f64::NEG_INFINITY), 0.0, "{fam}");
            assert_eq!(d.cdf(f64::INFINITY), 1.0, "{fam}");
            assert!(d.cdf(-1e6) < 1e-300);
        }
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(ShockDistribution::logistic(0.0).is_err());
        assert!(ShockDistribution::normal(-1.0).is_err());
        assert!(ShockDistribution::uniform(f64::NAN).is_err());
    }

    #[test]
    fn works_in_f32() {
        let d = ShockDistribution::<f32>::logistic(20.0).unwrap();
        assert!((d.cdf(40.0) - 0.880_797).abs() < 1e-5);
    }

    // Kolmogorov-Smirnov: sup |F_n - F| below the 99% critical value 1.628/sqrt(n).
    #[test]
    fn sampler_matches_cdf() {
        let n = 100_000;
        for fam in ShockFamily::ALL {
            let d = ShockDistribution::new(fam, 20.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let mut xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut sup: f64 = 0.0;
            for (i, &x) in xs.iter().enumerate() {
                let f = d.cdf(x);
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                sup = sup.max((f - lo).abs()).max((hi - f).abs());
            }
            assert!(sup < 1.628 / (n as f64).sqrt(), "{fam}: D = {sup}");
            let mean = xs.iter().sum::<f64>() / n as f64;
            assert!(mean.abs() < 0.5, "{fam}: mean {mean}");
        }
    }

    #[test]
    fn family_parse() {
        assert_eq!("Logistic".parse::<ShockFamily>().unwrap(), ShockFamily::Logistic);
        assert!("cauchy".parse::<ShockFamily>().is_err());
    }
}
