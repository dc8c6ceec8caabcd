//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type the simulator is generic over.
///
/// Everything is built on `nalgebra`'s `RealField`, so `f32` and `f64` both
/// work. Each type carries its own comparison tolerances: the `f64` values
/// are the ones quoted throughout the documentation.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Tolerance for checks that are exact up to accumulated rounding
    /// (unitarity, Hermiticity, nilpotency, chiral anticommutator).
    fn exact_tol() -> Self;

    /// Tolerance for eigen-residuals and spectra after a dense eigensolve.
    fn residual_tol() -> Self;

    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn exact_tol() -> Self {
        1e-12
    }

    fn residual_tol() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn exact_tol() -> Self {
        2e-5
    }

    fn residual_tol() -> Self {
        2e-4
    }
}

pub type C<T> = Complex<T>;
pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

#[inline]
pub(crate) fn c<T: Scalar>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Scalar>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `e^{i phi}`.
#[inline]
pub(crate) fn cis<T: Scalar>(phi: T) -> C<T> {
    Complex::new(phi.cos(), phi.sin())
}
