//! Windowed-sinc sample rate conversion.

use crate::audio::{AudioBuffer, AudioError};
use crate::sample::Sample;

/// Sinc zero crossings kept on each side of the interpolation kernel.
pub const SINC_ZERO_CROSSINGS: usize = 32;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Blackman window on `[-1, 1]`.
fn blackman(y: f64) -> f64 {
    let py = std::f64::consts::PI * y;
    0.42 + 0.5 * py.cos() + 0.08 * (2.0 * py).cos()
}

/// Resamples to `target_rate` with a Blackman-windowed sinc kernel. The
/// kernel is widened by the cutoff factor when downsampling, and each output
/// sample is normalized by its kernel sum, so a constant signal is preserved
/// exactly. Output length is `round(len * target / source)`.
pub fn resample<T: Sample>(
    input: &AudioBuffer<T>,
    target_rate: u32,
) -> Result<AudioBuffer<T>, AudioError> {
    if target_rate == 0 {
        return Err(AudioError::InvalidRate(0));
    }
    if target_rate == input.sample_rate {
        return Ok(input.clone());
    }
    if input.is_empty() {
        return Ok(AudioBuffer::new(Vec::new(), target_rate));
    }

    let n = input.len();
    let src = f64::from(input.sample_rate);
    let dst = f64::from(target_rate);
    let step = src / dst;
    let cutoff = (dst / src).min(1.0);
    let half_width = SINC_ZERO_CROSSINGS as f64 / cutoff;
    let out_len = (n as f64 * dst / src).round() as usize;

    let mut out = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let center = i as f64 * step;
        let k0 = (center - half_width).ceil().max(0.0) as usize;
        let k1 = ((center + half_width).floor() as usize).min(n - 1);
        let mut acc = 0.0f64;
        let mut norm = 0.0f64;
        for k in k0..=k1 {
            let x = (k as f64 - center) * cutoff;
            let kernel = sinc(x) * blackman(x / SINC_ZERO_CROSSINGS as f64);
            acc += kernel * input.samples[k].to64();
            norm += kernel;
        }
        out.push(T::of(if norm.abs() > 1e-30 { acc / norm } else { 0.0 }));
    }
    Ok(AudioBuffer::new(out, target_rate))
}
