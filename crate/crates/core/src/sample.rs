use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssignOps};
use rand::distr::uniform::SampleUniform;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Scalar type for sample and metric arithmetic: `f32` or `f64`.
///
/// The crate root fixes the pipeline aliases to `f64`; the parameter exists so
/// the DSP core can also run at `f32`.
pub trait Sample:
    Float + FloatConst + NumAssignOps + Sum + SampleUniform + rustfft::FftNum
{
    /// Converts an `f64` constant, which every `Sample` type can represent
    /// (possibly with rounding).
    fn of(v: f64) -> Self;

    /// Widens to `f64` for reporting.
    fn to64(self) -> f64;

    /// Draws one standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Sample for f32 {
    fn of(v: f64) -> Self {
        v as f32
    }

    fn to64(self) -> f64 {
        self as f64
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Sample for f64 {
    fn of(v: f64) -> Self {
        v
    }

    fn to64(self) -> f64 {
        self
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}
