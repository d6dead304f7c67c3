//! Scalar abstraction shared by the linear algebra, sampling and estimator code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Tolerances throughout the crate are stated for `f64`; with `f32` they are
/// scaled through [`Real::eps_scale`].
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for finite input.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Ratio of this type's machine epsilon to `f64::EPSILON`.
    #[inline]
    fn eps_scale() -> Self {
        Self::epsilon() / Self::lit(f64::EPSILON)
    }
}

impl Real for f32 {}
impl Real for f64 {}
