//! Scalar abstraction shared by the geometry, certificate and grid code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Floating point type the generic parts of the crate are written against.
///
/// Implemented for `f32` and `f64`. The operator and statistics pipeline is
/// pinned to `f64`; its tolerances are not reachable in single precision.
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal is representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize is representable")
    }

    #[inline]
    fn from_i64_lossy(v: i64) -> Self {
        Self::from_i64(v).expect("i64 is representable")
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Reduce `v` into `[0, 1)` with a floor, mapping the rounding case
/// `v - floor(v) == 1` back to zero.
#[inline]
pub fn wrap_unit<T: Real>(v: T) -> T {
    let r = v - v.floor();
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}
