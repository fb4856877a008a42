//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Smallest tolerance that is still meaningful at this precision.
    fn tolerance_floor() -> Self {
        Self::epsilon() * lit(64.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("index representable in scalar type")
}

#[inline]
pub(crate) fn from_i64<T: Real>(n: i64) -> T {
    T::from_i64(n).expect("integer representable in scalar type")
}
