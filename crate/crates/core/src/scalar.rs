//! Scalar abstraction for the decision-theoretic core.
//!
//! The policy/payoff algebra only needs field operations and an ordering, so it
//! runs on `f64`, `f32` and exact rationals alike. Anything that evaluates a
//! CDF additionally needs [`Real`].

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};
use std::fmt::Debug;

/// Field-like scalar: `f32`, `f64`, or `num_rational::Ratio<i64>`.
pub trait Scalar: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug {
    /// Small integer constant.
    fn int(n: i32) -> Self {
        Self::from_i32(n).expect("small integer is representable")
    }

    /// `num / den` as an exact quotient where the type allows it.
    fn ratio(num: i32, den: i32) -> Self {
        Self::int(num) / Self::int(den)
    }

    fn half() -> Self {
        Self::ratio(1, 2)
    }
}

impl<T> Scalar for T where T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug {}

/// Floating-point scalar, used where a CDF or a random draw is involved.
pub trait Real: Scalar + Float + Send + Sync {
    fn from_f64_lossy(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("f64 converts to a float type")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("float converts to f64")
    }
}

impl<T> Real for T where T: Scalar + Float + Send + Sync {}
