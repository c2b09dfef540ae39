//! Scalar abstraction for the belief-space numerics.
//!
//! Everything below the game layer is written against [`Scalar`] so the same
//! code runs in `f32` and `f64`. The game-level checkers fix `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar: f32 or f64.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used for "equal within rounding" comparisons of O(1) values.
    fn rounding_tol() -> Self;
}

impl Scalar for f32 {
    fn rounding_tol() -> Self {
        1e-5
    }
}

impl Scalar for f64 {
    fn rounding_tol() -> Self {
        1e-12
    }
}
