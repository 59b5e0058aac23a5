//! Thin wrappers over rustfft shared by the noise, convolution, metric, and
//! feature code.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::sample::Sample;

pub(crate) fn fft_forward<T: Sample>(data: &mut [Complex<T>]) {
    FftPlanner::new().plan_fft_forward(data.len()).process(data);
}

/// Inverse transform scaled by `1/n`, so `fft_inverse(fft_forward(x)) == x`
/// up to rounding.
pub(crate) fn fft_inverse<T: Sample>(data: &mut [Complex<T>]) {
    FftPlanner::new().plan_fft_inverse(data.len()).process(data);
    let scale = T::one() / T::of(data.len() as f64);
    for v in data.iter_mut() {
        *v = v.scale(scale);
    }
}

pub(crate) fn hann<T: Sample>(n: usize) -> Vec<T> {
    let denom = T::of(n as f64);
    (0..n)
        .map(|i| {
            let phase = T::of(2.0) * T::PI() * T::of(i as f64) / denom;
            T::of(0.5) * (T::one() - phase.cos())
        })
        .collect()
}

/// Reusable forward transform for framewise spectra. Plans once, then yields
/// one-sided magnitude spectra (`n/2 + 1` bins) per windowed frame.
pub(crate) struct FrameSpectrum<T: Sample> {
    fft: Arc<dyn Fft<T>>,
    window: Vec<T>,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Sample> FrameSpectrum<T> {
    pub fn new(frame_len: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(frame_len);
        let scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        Self {
            fft,
            window: hann(frame_len),
            buf: vec![Complex::new(T::zero(), T::zero()); frame_len],
            scratch,
        }
    }

    pub fn magnitudes(&mut self, frame: &[T], out: &mut Vec<T>) {
        assert_eq!(frame.len(), self.window.len());
        for (slot, (&s, &w)) in self.buf.iter_mut().zip(frame.iter().zip(&self.window)) {
            *slot = Complex::new(s * w, T::zero());
        }
        self.fft
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        out.clear();
        out.extend(self.buf[..frame.len() / 2 + 1].iter().map(|c| c.norm()));
    }
}
