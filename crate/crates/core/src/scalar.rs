//! Scalar abstraction: the solver is generic over the floating-point type.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used for coordinates, times, and costs.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for pulling an `f64` constant into the working scalar type.
#[inline]
pub fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("constant not representable in scalar type")
}

/// Totally ordered wrapper for heap keys. Panics on NaN, which never arises
/// from the geometric quantities we order (they may be infinite).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct OrdF<F>(pub F);

impl<F: Real> Eq for OrdF<F> {}

impl<F: Real> Ord for OrdF<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .partial_cmp(&other.0)
            .expect("NaN is never a valid ordering key")
    }
}
