//! Colored noise generation and SNR-controlled mixing.
//!
//! Three generators, all normalized to a common RMS before mixing:
//!
//! * `gaussian`: i.i.d. standard normal samples.
//! * `white`: i.i.d. uniform samples on `[-1, 1]`.
//! * `pink`: white gaussian spectrum shaped by `1/sqrt(k)` per frequency bin,
//!   giving a power density proportional to `1/f` independent of the sample
//!   rate.
//!
//! Mixing scales the noise by a closed-form gain so the signal-to-noise ratio
//! over the whole file hits a requested decibel target.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{AudioBuffer, AudioError};
use crate::fft::{fft_forward, fft_inverse};
use crate::sample::Sample;

/// RMS every generated noise buffer is normalized to before gain scaling.
pub const NOISE_RMS: f64 = 0.1;

/// Mixtures that would clip are rescaled to this peak.
pub const CLIP_GUARD_PEAK: f64 = 0.95;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("signal is silent, snr is undefined")]
    SilentSignal,
    #[error("{which} power must be positive, got {power}")]
    NonPositivePower { which: &'static str, power: f64 },
    #[error("snr range [{lo}, {hi}] has lo > hi")]
    InvalidRange { lo: f64, hi: f64 },
    #[error(transparent)]
    Audio(#[from] AudioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    White,
    Pink,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::White => "white",
            NoiseKind::Pink => "pink",
        }
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "white" => Ok(NoiseKind::White),
            "pink" => Ok(NoiseKind::Pink),
            other => Err(format!("unknown noise kind `{other}`")),
        }
    }
}

/// Target SNR in dB: either fixed or drawn uniformly from `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrTarget {
    Fixed(f64),
    Range { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
    pub target_snr_db: SnrTarget,
}

/// One mixing run. `mixture = signal + gain * noise`, then scaled by
/// `post_scale` (1.0 unless the sum would clip).
#[derive(Debug, Clone)]
pub struct MixResult<T = f64> {
    pub mixture: AudioBuffer<T>,
    pub achieved_snr_db: f64,
    pub gain: f64,
    pub drawn_snr_db: f64,
    pub seed: u64,
    pub post_scale: f64,
}

/// Generates `num_samples` of noise, RMS-normalized to [`NOISE_RMS`].
/// Identical `(kind, num_samples, seed)` give identical buffers.
pub fn generate_noise<T: Sample>(
    kind: NoiseKind,
    num_samples: usize,
    sample_rate: u32,
    seed: u64,
) -> AudioBuffer<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples: Vec<T> = match kind {
        NoiseKind::Gaussian => (0..num_samples)
            .map(|_| T::standard_normal(&mut rng))
            .collect(),
        NoiseKind::White => (0..num_samples)
            .map(|_| T::of(rng.random_range(-1.0..=1.0)))
            .collect(),
        NoiseKind::Pink => pink(num_samples, &mut rng),
    };
    let power: f64 = samples.iter().map(|&s| s.to64() * s.to64()).sum::<f64>()
        / num_samples.max(1) as f64;
    if power > 0.0 {
        let scale = T::of(NOISE_RMS / power.sqrt());
        for s in &mut samples {
            *s *= scale;
        }
    }
    AudioBuffer::new(samples, sample_rate)
}

/// Spectral shaping: white gaussian spectrum with bin `k` scaled by
/// `1/sqrt(min(k, n-k))`, DC zeroed. The mask depends only on the bin index,
/// so the log-log power slope is -1 at any sample rate.
fn pink<T: Sample, R: Rng>(n: usize, rng: &mut R) -> Vec<T> {
    if n == 0 {
        return Vec::new();
    }
    let mut spec: Vec<Complex<T>> = (0..n)
        .map(|_| Complex::new(T::standard_normal(rng), T::zero()))
        .collect();
    fft_forward(&mut spec);
    spec[0] = Complex::new(T::zero(), T::zero());
    for (k, v) in spec.iter_mut().enumerate().skip(1) {
        let kk = k.min(n - k);
        *v = v.scale(T::of(1.0 / (kk as f64).sqrt()));
    }
    fft_inverse(&mut spec);
    spec.into_iter().map(|c| c.re).collect()
}

/// Gain `g` with `10*log10(p_signal / (g^2 * p_noise)) == target_snr_db`.
pub fn snr_gain(signal_power: f64, noise_power: f64, target_snr_db: f64) -> Result<f64, NoiseError> {
    if signal_power <= 0.0 {
        return Err(NoiseError::NonPositivePower {
            which: "signal",
            power: signal_power,
        });
    }
    if noise_power <= 0.0 {
        return Err(NoiseError::NonPositivePower {
            which: "noise",
            power: noise_power,
        });
    }
    Ok((signal_power / (noise_power * 10f64.powf(target_snr_db / 10.0))).sqrt())
}

/// Adds noise to `signal` at the requested SNR.
///
/// `spec.seed` drives one uniform draw for the target (a fixed target is
/// treated as a zero-width range, so the stream advances identically), then
/// seeds the noise generator. Achieved SNR is measured from the two addends;
/// if the sum peaks above 1 it is rescaled to [`CLIP_GUARD_PEAK`] and the
/// factor recorded in `post_scale`.
pub fn mix_at_snr<T: Sample>(
    signal: &AudioBuffer<T>,
    spec: &NoiseSpec,
) -> Result<MixResult<T>, NoiseError> {
    let signal_power = signal.rms_power()?.to64();
    if signal_power <= 0.0 {
        return Err(NoiseError::SilentSignal);
    }
    let (lo, hi) = match spec.target_snr_db {
        SnrTarget::Fixed(v) => (v, v),
        SnrTarget::Range { lo, hi } => (lo, hi),
    };
    if lo > hi {
        return Err(NoiseError::InvalidRange { lo, hi });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let u: f64 = rng.random();
    let drawn_snr_db = lo + (hi - lo) * u;
    let noise_seed = rng.next_u64();

    let noise = generate_noise::<T>(spec.kind, signal.len(), signal.sample_rate, noise_seed);
    let noise_power = noise.rms_power()?.to64();
    let gain = snr_gain(signal_power, noise_power, drawn_snr_db)?;

    let g = T::of(gain);
    let mut mixture: Vec<T> = signal
        .samples
        .iter()
        .zip(&noise.samples)
        .map(|(&s, &n)| s + g * n)
        .collect();

    let scaled_noise_power = gain * gain * noise_power;
    let achieved_snr_db = 10.0 * (signal_power / scaled_noise_power).log10();

    let peak = mixture
        .iter()
        .fold(T::zero(), |acc, &s| acc.max(s.abs()))
        .to64();
    let post_scale = if peak > 1.0 { CLIP_GUARD_PEAK / peak } else { 1.0 };
    if post_scale != 1.0 {
        let ps = T::of(post_scale);
        for s in &mut mixture {
            *s *= ps;
        }
    }

    Ok(MixResult {
        mixture: AudioBuffer::new(mixture, signal.sample_rate),
        achieved_snr_db,
        gain,
        drawn_snr_db,
        seed: spec.seed,
        post_scale,
    })
}
