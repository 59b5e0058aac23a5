//! Mono audio buffers and the scalar operations the rest of the pipeline
//! builds on.

use thiserror::Error;

use crate::sample::Sample;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("i/o error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed wav ({path}): bad `{chunk}` chunk: {detail}")]
    Format {
        path: String,
        chunk: &'static str,
        detail: String,
    },
    #[error(
        "unsupported wav encoding in {path}: format tag {format_tag}, {bits_per_sample} bits \
         (expected 16-bit pcm or 32-bit float)"
    )]
    UnsupportedEncoding {
        path: String,
        format_tag: u16,
        bits_per_sample: u16,
    },
    #[error("operation undefined on an empty buffer")]
    EmptyBuffer,
    #[error("invalid sample rate {0}")]
    InvalidRate(u32),
}

/// Mono signal with its sample rate. Samples are nominally in `[-1, 1]`;
/// intermediate stages may exceed that range until a write or an explicit
/// normalization clamps it.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer<T = f64> {
    pub samples: Vec<T>,
    pub sample_rate: u32,
}

impl<T: Sample> AudioBuffer<T> {
    /// Sample rate must be positive.
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Self {
        assert!(sample_rate > 0, "sample rate must be positive");
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    /// Largest absolute sample value, zero for an empty buffer.
    pub fn peak(&self) -> T {
        self.samples
            .iter()
            .fold(T::zero(), |acc, &s| acc.max(s.abs()))
    }

    /// Mean squared sample value.
    pub fn rms_power(&self) -> Result<T, AudioError> {
        if self.samples.is_empty() {
            return Err(AudioError::EmptyBuffer);
        }
        let sum: T = self.samples.iter().map(|&s| s * s).sum();
        Ok(sum / T::of(self.samples.len() as f64))
    }

    /// Rescales so the peak equals `target_peak` in `(0, 1]`. An all-zero
    /// buffer is returned unchanged.
    pub fn peak_normalize(&self, target_peak: T) -> AudioBuffer<T> {
        assert!(
            target_peak > T::zero() && target_peak <= T::one(),
            "target peak must be in (0, 1]"
        );
        let peak = self.peak();
        if peak == T::zero() {
            return self.clone();
        }
        let scale = target_peak / peak;
        AudioBuffer {
            samples: self.samples.iter().map(|&s| s * scale).collect(),
            sample_rate: self.sample_rate,
        }
    }
}
