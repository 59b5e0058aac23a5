//! Reference spoof detector: log band-energy statistics into a logistic
//! regression.
//!
//! This is deliberately small. Its job is to close the loop between audio,
//! manifests, and the evaluation metrics with something trainable in
//! seconds, not to compete with neural detectors. Features are per-band
//! means and standard deviations of log mel-band energies over frames; the
//! classifier is full-batch gradient descent on the mean logistic loss with
//! z-scored inputs.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::AudioBuffer;
use crate::fft::FrameSpectrum;
use crate::manifest::Label;
use crate::sample::Sample;

/// Floor applied before taking band-energy logs.
pub const ENERGY_FLOOR: f64 = 1e-10;

/// Training stops once the loss improves by less than this between epochs.
pub const EARLY_STOP_TOL: f64 = 1e-8;

/// Feature dimensions with standard deviation below this keep a unit scale
/// instead of being divided by ~0.
const STD_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("audio is {got} Hz but features are configured for {want} Hz")]
    RateMismatch { got: u32, want: u32 },
    #[error("audio too short: {len} samples, need at least {frame}")]
    TooShort { len: usize, frame: usize },
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("training needs {0}")]
    BadTrainingSet(&'static str),
    #[error("i/o error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model file {path}: {detail}")]
    Model { path: String, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub num_bands: usize,
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            num_bands: 40,
            frame_len: 512,
            hop: 256,
            sample_rate: 16_000,
        }
    }
}

impl FeatureConfig {
    /// Two statistics per band.
    pub fn dims(&self) -> usize {
        2 * self.num_bands
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T = f64> {
    pub values: Vec<T>,
}

fn mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_inv(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters over the one-sided spectrum, with centers equally
/// spaced on the mel scale from 0 Hz to Nyquist.
fn filterbank<T: Sample>(config: &FeatureConfig) -> Vec<Vec<T>> {
    let bins = config.frame_len / 2 + 1;
    let nyquist = f64::from(config.sample_rate) / 2.0;
    let top = mel(nyquist);
    let points: Vec<f64> = (0..config.num_bands + 2)
        .map(|i| mel_inv(top * i as f64 / (config.num_bands + 1) as f64))
        .collect();
    let hz_per_bin = f64::from(config.sample_rate) / config.frame_len as f64;
    (0..config.num_bands)
        .map(|b| {
            let (lo, mid, hi) = (points[b], points[b + 1], points[b + 2]);
            (0..bins)
                .map(|k| {
                    let f = k as f64 * hz_per_bin;
                    let w = if f <= lo || f >= hi {
                        0.0
                    } else if f <= mid {
                        (f - lo) / (mid - lo)
                    } else {
                        (hi - f) / (hi - mid)
                    };
                    T::of(w)
                })
                .collect()
        })
        .collect()
}

/// Per-band mean and standard deviation of log band energies over frames:
/// `[mean_0..mean_B, std_0..std_B]`.
pub fn extract_features<T: Sample>(
    audio: &AudioBuffer<T>,
    config: &FeatureConfig,
) -> Result<FeatureVector<T>, DetectorError> {
    if audio.sample_rate != config.sample_rate {
        return Err(DetectorError::RateMismatch {
            got: audio.sample_rate,
            want: config.sample_rate,
        });
    }
    if audio.len() < config.frame_len {
        return Err(DetectorError::TooShort {
            len: audio.len(),
            frame: config.frame_len,
        });
    }
    let filters = filterbank::<T>(config);
    let mut spectrum = FrameSpectrum::<T>::new(config.frame_len);
    let mut mags = Vec::new();
    let b = config.num_bands;
    // log_energies[band] over frames; two passes keep the variance exact
    // when every frame is identical.
    let mut log_energies: Vec<Vec<f64>> = vec![Vec::new(); b];
    let mut start = 0usize;
    while start + config.frame_len <= audio.len() {
        spectrum.magnitudes(&audio.samples[start..start + config.frame_len], &mut mags);
        for (band, filter) in filters.iter().enumerate() {
            let energy: f64 = filter
                .iter()
                .zip(&mags)
                .map(|(&w, &m)| (w * m * m).to64())
                .sum();
            log_energies[band].push(energy.max(ENERGY_FLOOR).ln());
        }
        start += config.hop.max(1);
    }
    let nf = log_energies[0].len() as f64;
    let mut values = Vec::with_capacity(2 * b);
    for band in &log_energies {
        values.push(T::of(band.iter().sum::<f64>() / nf));
    }
    for band in &log_energies {
        let mean = band.iter().sum::<f64>() / nf;
        // Corrected two-pass variance: the second sum cancels the rounding
        // error in the mean, so identical frames give zero spread.
        let (mut sum_d, mut sum_d2) = (0.0f64, 0.0f64);
        for &v in band {
            let d = v - mean;
            sum_d += d;
            sum_d2 += d * d;
        }
        let var = ((sum_d2 - sum_d * sum_d / nf) / nf).max(0.0);
        values.push(T::of(var.sqrt()));
    }
    Ok(FeatureVector { values })
}

/// Trained model: feature layout, z-score parameters, and the linear
/// classifier on top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel<T = f64> {
    pub feature_config: FeatureConfig,
    pub means: Vec<T>,
    pub stds: Vec<T>,
    pub weights: Vec<T>,
    pub bias: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            epochs: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T = f64> {
    pub model: DetectorModel<T>,
    pub epochs_run: usize,
    pub final_loss: f64,
}

fn sigmoid<T: Sample>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// Mean logistic loss and its gradient for weights and bias over z-scored
/// rows with 0/1 targets.
pub fn logistic_loss_grad<T: Sample>(
    weights: &[T],
    bias: T,
    rows: &[Vec<T>],
    targets: &[T],
) -> (T, Vec<T>, T) {
    let n = T::of(rows.len() as f64);
    let mut loss = T::zero();
    let mut grad_w = vec![T::zero(); weights.len()];
    let mut grad_b = T::zero();
    let tiny = T::of(1e-12);
    let cap = T::one() - tiny;
    for (row, &y) in rows.iter().zip(targets) {
        let z = row
            .iter()
            .zip(weights)
            .fold(bias, |acc, (&x, &w)| acc + x * w);
        let p = sigmoid(z);
        let p_clamped = p.max(tiny).min(cap);
        loss -= y * p_clamped.ln() + (T::one() - y) * (T::one() - p_clamped).ln();
        let err = p - y;
        for (g, &x) in grad_w.iter_mut().zip(row) {
            *g += err * x;
        }
        grad_b += err;
    }
    loss /= n;
    for g in &mut grad_w {
        *g /= n;
    }
    grad_b /= n;
    (loss, grad_w, grad_b)
}

/// Fits the logistic layer by full-batch gradient descent from zero weights.
/// Both classes must be present. Deterministic: no shuffling, no random
/// init.
pub fn train<T: Sample>(
    features: &[FeatureVector<T>],
    labels: &[Label],
    feature_config: &FeatureConfig,
    train_config: &TrainConfig,
) -> Result<TrainOutcome<T>, DetectorError> {
    if features.is_empty() {
        return Err(DetectorError::BadTrainingSet("at least one example"));
    }
    if features.len() != labels.len() {
        return Err(DetectorError::BadTrainingSet(
            "as many labels as feature vectors",
        ));
    }
    let dims = feature_config.dims();
    for fv in features {
        if fv.values.len() != dims {
            return Err(DetectorError::DimMismatch {
                expected: dims,
                got: fv.values.len(),
            });
        }
    }
    let has_spoof = labels.contains(&Label::Spoof);
    let has_bona = labels.contains(&Label::BonaFide);
    if !has_spoof || !has_bona {
        return Err(DetectorError::BadTrainingSet("both classes"));
    }

    let n = features.len() as f64;
    let mut means = vec![0.0f64; dims];
    for fv in features {
        for (m, &v) in means.iter_mut().zip(&fv.values) {
            *m += v.to64();
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut stds = vec![0.0f64; dims];
    for fv in features {
        for (s, (&v, &m)) in stds.iter_mut().zip(fv.values.iter().zip(&means)) {
            let d = v.to64() - m;
            *s += d * d;
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt();
        if *s < STD_FLOOR {
            *s = 1.0;
        }
    }

    let rows: Vec<Vec<T>> = features
        .iter()
        .map(|fv| {
            fv.values
                .iter()
                .zip(means.iter().zip(&stds))
                .map(|(&v, (&m, &s))| T::of((v.to64() - m) / s))
                .collect()
        })
        .collect();
    let targets: Vec<T> = labels
        .iter()
        .map(|&l| if l == Label::Spoof { T::one() } else { T::zero() })
        .collect();

    let lr = T::of(train_config.learning_rate);
    let mut weights = vec![T::zero(); dims];
    let mut bias = T::zero();
    let mut prev_loss = f64::INFINITY;
    let mut final_loss = f64::INFINITY;
    let mut epochs_run = 0usize;
    for epoch in 0..train_config.epochs {
        let (loss, grad_w, grad_b) = logistic_loss_grad(&weights, bias, &rows, &targets);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= lr * *g;
        }
        bias -= lr * grad_b;
        final_loss = loss.to64();
        epochs_run = epoch + 1;
        if (prev_loss - final_loss).abs() < EARLY_STOP_TOL {
            break;
        }
        prev_loss = final_loss;
    }

    Ok(TrainOutcome {
        model: DetectorModel {
            feature_config: *feature_config,
            means: means.iter().map(|&m| T::of(m)).collect(),
            stds: stds.iter().map(|&s| T::of(s)).collect(),
            weights,
            bias,
        },
        epochs_run,
        final_loss,
    })
}

/// Spoof likelihood in (0, 1); higher means more likely spoofed.
pub fn score<T: Sample>(
    model: &DetectorModel<T>,
    features: &FeatureVector<T>,
) -> Result<T, DetectorError> {
    if features.values.len() != model.weights.len() {
        return Err(DetectorError::DimMismatch {
            expected: model.weights.len(),
            got: features.values.len(),
        });
    }
    let z = features
        .values
        .iter()
        .zip(model.means.iter().zip(&model.stds))
        .zip(&model.weights)
        .fold(model.bias, |acc, ((&v, (&m, &s)), &w)| {
            acc + w * ((v - m) / s)
        });
    Ok(sigmoid(z))
}

impl<T: Sample + Serialize + for<'de> Deserialize<'de>> DetectorModel<T> {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DetectorError> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("model serializes");
        std::fs::write(path, text).map_err(|e| DetectorError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DetectorError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| DetectorError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| DetectorError::Model {
            path: path.display().to_string(),
            detail: e.to_string(),
        })
    }
}
