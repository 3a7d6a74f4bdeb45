//! Floating-point scalar abstraction: every numeric kernel in this crate is
//! generic over [`Scalar`], instantiated as `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// f32 or f64.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Lossy cast from `f64`; total for `f32`/`f64` targets.
#[inline]
pub fn cast<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("f64 -> Scalar cast is total for float targets")
}

/// Cast from `usize`, used for counts entering means and variances.
#[inline]
pub fn cast_usize<S: Scalar>(n: usize) -> S {
    cast(n as f64)
}
