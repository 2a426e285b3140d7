//! Scalar abstraction: every numeric routine in this crate is generic over a
//! floating-point type so the whole pipeline can run in `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, NumCast};

/// Floating-point scalar used throughout the crate (`f32` or `f64`).
pub trait Real:
    Float + FromPrimitive + NumCast + NumAssign + Sum + Debug + Display + Default + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + NumCast + NumAssign + Sum + Debug + Display + Default + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
///
/// Conversion from `f64` is total for any `Real` (at worst it rounds), so
/// this never panics for finite inputs.
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 value representable in scalar type")
}
