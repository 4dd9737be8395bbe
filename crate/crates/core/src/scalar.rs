//! Scalar abstraction for the math kernels.

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign, NumCast};

/// Floating-point scalar the geometry and clustering kernels are generic
/// over. `f32` and `f64` both qualify.
pub trait Scalar: Float + FloatConst + NumAssign + NumCast + Sum + Debug + 'static {
    /// Lift an `f64` constant into the scalar type.
    fn c(v: f64) -> Self {
        NumCast::from(v).expect("constant not representable in scalar type")
    }
}

impl<T> Scalar for T where T: Float + FloatConst + NumAssign + NumCast + Sum + Debug + 'static {}
