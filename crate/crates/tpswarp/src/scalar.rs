//! Floating-point scalar abstraction: f32 or f64.

use std::fmt;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar type the engine is generic over.
///
/// Implemented for `f32` and `f64` through the blanket impl below.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + fmt::Debug
    + fmt::Display
    + 'static
{
    /// Lossy conversion from `f64`, for thresholds and literal constants.
    #[inline]
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 constant converts to scalar")
    }

    /// Widening (or identity) conversion to `f64` for diagnostics.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Send
        + Sync
        + fmt::Debug
        + fmt::Display
        + 'static
{
}
