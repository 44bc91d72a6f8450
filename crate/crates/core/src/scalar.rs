use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar accepted by the numerical kernel: `f32` or `f64`.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal, rounding to the nearest representable value.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
