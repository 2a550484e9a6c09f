//! Scalar abstraction for the low-level numerical kernels.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the numerical kernels are generic over (`f32`/`f64`).
pub trait Real: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static {
    /// Shorthand for converting an `f64` literal constant.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }
}

impl<T> Real for T where T: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static {}
