use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar underlying every complex matrix in the crate.
///
/// Implemented for `f32` and `f64`. All numerical tolerances in the crate are
/// phrased for `f64`; [`Real::tolerance`] widens them for lower precision types.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + std::fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the supported types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Maps a tolerance stated for double precision onto this type.
    fn tolerance(f64_tol: f64) -> Self;

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite real")
    }
}

impl Real for f64 {
    fn tolerance(f64_tol: f64) -> Self {
        f64_tol
    }
}

impl Real for f32 {
    fn tolerance(f64_tol: f64) -> Self {
        f64_tol.max(1e-4) as f32
    }
}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}
