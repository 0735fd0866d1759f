//! Floating-point scalar abstraction.
//!
//! Every numeric routine in the crate is generic over [`Scalar`], which is
//! implemented for `f32` and `f64`. File formats always store `f64`; values
//! are converted on the way in and out.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar used for features, dissimilarities and correlation scores.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Absolute variance floor below which a vector is treated as constant.
    fn variance_floor() -> Self;

    /// Converts an `f64` literal, saturating to infinity when out of range.
    fn lit(v: f64) -> Self;

    fn to_f64_lossless(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn variance_floor() -> Self {
        1e-300
    }

    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    // 1e-300 underflows in single precision.
    #[inline]
    fn variance_floor() -> Self {
        f32::MIN_POSITIVE
    }

    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        f64::from(self)
    }
}
