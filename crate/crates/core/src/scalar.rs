//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the solver can run on. Implemented for `f32` and `f64`.
///
/// Tolerances in the crate are written in `f64` terms and passed through
/// [`Scalar::tol`], which floors them at a small multiple of the type's
/// machine epsilon so that `f32` runs do not chase unreachable accuracy.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the implemented types.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion for reporting and for `f64`-only special functions.
    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("finite or infinite float converts")
    }

    /// `max(base, 64·ε)`.
    #[inline]
    fn tol(base: f64) -> Self {
        Self::c(base).max(Self::epsilon() * Self::c(64.0))
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::c(0.5)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
