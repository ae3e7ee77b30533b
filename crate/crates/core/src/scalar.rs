//! Scalar abstraction for amplitude arithmetic.
//!
//! All state-vector code is generic over [`Scalar`], implemented for `f32`
//! and `f64`. Each precision carries its own tolerances; the `f64` values
//! are the engine defaults.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar underlying a complex amplitude.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + FromStr + Default + Send + Sync + 'static
{
    /// Amplitudes with magnitude below this are dropped from a superposition.
    const PRUNE: Self;
    /// Term-wise tolerance for state equality (legality checks).
    const EQUALITY: Self;
    /// Probabilities at or below this count as zero.
    const ZERO_PROB: Self;
    /// Allowed deviation of the squared norm from one.
    const NORM: Self;
    /// Identifier written into save documents.
    const NAME: &'static str;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn frac_1_sqrt_2() -> Self {
        <Self as FloatConst>::FRAC_1_SQRT_2()
    }
}

impl Scalar for f64 {
    const PRUNE: Self = 1e-12;
    const EQUALITY: Self = 1e-9;
    const ZERO_PROB: Self = 1e-9;
    const NORM: Self = 1e-9;
    const NAME: &'static str = "f64";
}

impl Scalar for f32 {
    const PRUNE: Self = 1e-6;
    const EQUALITY: Self = 1e-4;
    const ZERO_PROB: Self = 1e-5;
    const NORM: Self = 1e-4;
    const NAME: &'static str = "f32";
}

/// Complex amplitude over a scalar.
pub type Amp<T> = num_complex::Complex<T>;

pub(crate) fn amp<T: Scalar>(re: f64, im: f64) -> Amp<T> {
    Amp::new(T::lit(re), T::lit(im))
}

/// Multiplication by `i`.
pub(crate) fn times_i<T: Scalar>(a: Amp<T>) -> Amp<T> {
    Amp::new(-a.im, a.re)
}

/// Multiplication by `-i`.
pub(crate) fn times_neg_i<T: Scalar>(a: Amp<T>) -> Amp<T> {
    Amp::new(a.im, -a.re)
}
