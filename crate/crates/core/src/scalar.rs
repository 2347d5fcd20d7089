//! Scalar abstraction shared by the numeric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating point type the kernels are generic over (`f32` or `f64`).
pub trait Real: Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal, rounding to the nearest representable value.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_len(n: usize) -> Self {
        Self::from_usize(n).expect("length fits the scalar type")
    }

    /// Tiny pivot magnitude whose square still does not underflow.
    #[inline]
    fn pivot_floor() -> Self {
        Self::min_positive_value().sqrt()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Pairwise (tree) summation. The reduction order depends only on the length,
/// so results are reproducible regardless of how the terms were produced.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().copied().fold(T::zero(), |acc, x| acc + x);
    }
    let (lo, hi) = xs.split_at(xs.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}
