use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point type the solvers run in.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant. Panics only if the value is not representable at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in the scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[inline]
pub(crate) fn c<T: Scalar>(x: f64) -> T {
    T::lit(x)
}

/// `|x|^e` with `0^e = 0` for `e > 0`.
#[inline]
pub(crate) fn abs_pow<T: Scalar>(x: T, e: T) -> T {
    let a = x.abs();
    if a == T::zero() {
        T::zero()
    } else {
        a.powf(e)
    }
}

/// `|x|^{e-1} sign(x)`, the derivative of `|x|^e / e`.
#[inline]
pub(crate) fn signed_pow<T: Scalar>(x: T, e: T) -> T {
    let a = x.abs();
    if a == T::zero() {
        T::zero()
    } else {
        a.powf(e - T::one()) * x.signum()
    }
}

/// `max(x, 0)^e`.
#[inline]
pub(crate) fn pos_pow<T: Scalar>(x: T, e: T) -> T {
    if x > T::zero() {
        x.powf(e)
    } else {
        T::zero()
    }
}
