//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the model is evaluated in: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal or tolerance into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this type.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion back to `f64`, for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `1 - e^{-x}(1 + x)` without cancellation for small `x`.
///
/// Appears in the per-period accrual integral and in the premium bound.
pub fn one_minus_exp_times_linear<T: Scalar>(x: T) -> T {
    if x.abs() < T::lit(1e-2) {
        // sum_{k>=2} (-1)^k (k-1) x^k / k!
        let c2 = T::lit(0.5);
        let c3 = T::lit(-1.0 / 3.0);
        let c4 = T::lit(1.0 / 8.0);
        let c5 = T::lit(-1.0 / 30.0);
        let c6 = T::lit(1.0 / 144.0);
        let c7 = T::lit(-1.0 / 840.0);
        x * x * (c2 + x * (c3 + x * (c4 + x * (c5 + x * (c6 + x * c7)))))
    } else {
        -(-x).exp_m1() - x * (-x).exp()
    }
}

/// `e^{-x} - 1 + x` without cancellation for small `x`.
pub fn exp_neg_minus_one_plus<T: Scalar>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        // x^2/2 - x^3/6 + x^4/24 - x^5/120
        let c2 = T::lit(0.5);
        let c3 = T::lit(-1.0 / 6.0);
        let c4 = T::lit(1.0 / 24.0);
        let c5 = T::lit(-1.0 / 120.0);
        x * x * (c2 + x * (c3 + x * (c4 + x * c5)))
    } else {
        (-x).exp_m1() + x
    }
}
