//! Scalar abstraction shared by every numerical routine in this crate.

use std::fmt;

use rand::distributions::uniform::SampleUniform;
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar (`f32` or `f64`) usable throughout the library.
///
/// Bundles the arithmetic traits the kernels need with the sampling hooks
/// used by the channel and noise generators.
pub trait Float:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + SampleUniform
    + fmt::Debug
    + fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Draws one standard normal sample from `rng`.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Converts an `f64` constant (tolerances, configuration values) into `Self`.
    fn cast(value: f64) -> Self {
        num_traits::FromPrimitive::from_f64(value).expect("constant not representable")
    }

    /// Lossy view as `f64`, used when reporting and serializing results.
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar convertible to f64")
    }
}

impl Float for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Float for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}
