//! Replay channel simulation: room impulse response convolution and
//! manifest-level RIR augmentation.
//!
//! Convolving a clip with a recorded RIR stands in for playing it through a
//! loudspeaker and re-recording it across the room. Augmentation applies a
//! bank of such impulse responses to a fraction of a manifest's clips, which
//! is how a detector is retrained to survive that channel.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{AudioBuffer, AudioError};
use crate::fft::{fft_forward, fft_inverse};
use crate::manifest::{Manifest, ManifestEntry, ManifestError};
use crate::noise::{mix_at_snr, NoiseError, NoiseSpec, CLIP_GUARD_PEAK};
use crate::resample::resample;
use crate::sample::Sample;
use crate::seed::derive_seed;
use crate::wav::{read_wav, write_wav, WavEncoding};

/// Signals at or below this length (shorter side) are convolved directly;
/// longer pairs go through the FFT path.
pub const DIRECT_CONVOLUTION_LIMIT: usize = 64;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("sample rate mismatch: signal {signal} Hz, impulse {impulse} Hz")]
    RateMismatch { signal: u32, impulse: u32 },
    #[error("impulse response is empty")]
    EmptyImpulse,
    #[error("no usable impulse responses under {dir}")]
    EmptyBank { dir: String },
    #[error("augmentation probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("i/o error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
}

/// A room impulse response and the hardware that recorded it.
#[derive(Debug, Clone)]
pub struct Rir<T = f64> {
    pub impulse: AudioBuffer<T>,
    pub uid: String,
    pub mic: String,
    pub speaker: String,
}

/// Impulse responses keyed by setup uid, iterated in sorted order.
#[derive(Debug, Clone)]
pub struct RirBank<T = f64> {
    entries: BTreeMap<String, Rir<T>>,
}

impl<T> RirBank<T> {
    pub fn get(&self, uid: &str) -> Option<&Rir<T>> {
        self.entries.get(uid)
    }

    pub fn uids(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rir<T>> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Direct time-domain linear convolution, length `n + m - 1`.
pub fn convolve_direct<T: Sample>(x: &[T], h: &[T]) -> Vec<T> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); x.len() + h.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        for (j, &hj) in h.iter().enumerate() {
            out[i + j] += xi * hj;
        }
    }
    out
}

/// FFT-based linear convolution, length `n + m - 1`, padded to a power of
/// two.
pub fn convolve_fft<T: Sample>(x: &[T], h: &[T]) -> Vec<T> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let out_len = x.len() + h.len() - 1;
    let size = out_len.next_power_of_two();
    let zero = Complex::new(T::zero(), T::zero());
    let mut fx = vec![zero; size];
    let mut fh = vec![zero; size];
    for (slot, &v) in fx.iter_mut().zip(x) {
        slot.re = v;
    }
    for (slot, &v) in fh.iter_mut().zip(h) {
        slot.re = v;
    }
    fft_forward(&mut fx);
    fft_forward(&mut fh);
    for (a, b) in fx.iter_mut().zip(&fh) {
        *a *= *b;
    }
    fft_inverse(&mut fx);
    fx[..out_len].iter().map(|c| c.re).collect()
}

/// Full linear convolution; picks the direct path for short pairs and the
/// FFT path above [`DIRECT_CONVOLUTION_LIMIT`].
pub fn convolve_full<T: Sample>(x: &[T], h: &[T]) -> Vec<T> {
    if x.len().min(h.len()) <= DIRECT_CONVOLUTION_LIMIT {
        convolve_direct(x, h)
    } else {
        convolve_fft(x, h)
    }
}

/// Convolves a signal with an impulse response, truncates to the signal
/// length, and rescales so the output peak equals the input peak. A unit
/// impulse therefore returns the input exactly.
pub fn convolve<T: Sample>(signal: &AudioBuffer<T>, rir: &Rir<T>) -> Result<AudioBuffer<T>, ReplayError> {
    if rir.impulse.is_empty() {
        return Err(ReplayError::EmptyImpulse);
    }
    if signal.sample_rate != rir.impulse.sample_rate {
        return Err(ReplayError::RateMismatch {
            signal: signal.sample_rate,
            impulse: rir.impulse.sample_rate,
        });
    }
    if signal.is_empty() {
        return Ok(signal.clone());
    }
    let mut out = convolve_full(&signal.samples, &rir.impulse.samples);
    out.truncate(signal.len());
    let in_peak = signal.peak();
    let out_peak = out.iter().fold(T::zero(), |acc, &s| acc.max(s.abs()));
    if in_peak > T::zero() && out_peak > T::zero() {
        let scale = in_peak / out_peak;
        if scale != T::one() {
            for s in &mut out {
                *s *= scale;
            }
        }
    }
    Ok(AudioBuffer::new(out, signal.sample_rate))
}

/// Noise-floor draw details from one replay run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixTrace {
    pub seed: u64,
    pub drawn_snr_db: f64,
    pub achieved_snr_db: f64,
    pub gain: f64,
}

/// One simulated replay: the processed audio plus everything needed to
/// reproduce or audit the run.
#[derive(Debug, Clone)]
pub struct ReplayOutcome<T = f64> {
    pub audio: AudioBuffer<T>,
    pub mix: Option<MixTrace>,
    /// Combined clip-guard rescale (noise mixing and post-convolution),
    /// 1.0 when nothing clipped.
    pub post_scale: f64,
}

/// Replay channel: RIR convolution, then an optional noise floor, then a
/// clip guard that rescales to [`CLIP_GUARD_PEAK`] if the result peaks above
/// one.
pub fn simulate_replay<T: Sample>(
    signal: &AudioBuffer<T>,
    rir: &Rir<T>,
    noise_floor: Option<&NoiseSpec>,
) -> Result<ReplayOutcome<T>, ReplayError> {
    let convolved = convolve(signal, rir)?;
    let (mut out, mix, mut post_scale) = match noise_floor {
        Some(spec) => {
            let mixed = mix_at_snr(&convolved, spec)?;
            let trace = MixTrace {
                seed: mixed.seed,
                drawn_snr_db: mixed.drawn_snr_db,
                achieved_snr_db: mixed.achieved_snr_db,
                gain: mixed.gain,
            };
            (mixed.mixture, Some(trace), mixed.post_scale)
        }
        None => (convolved, None, 1.0),
    };
    let peak = out.peak();
    if peak > T::one() {
        post_scale *= CLIP_GUARD_PEAK / peak.to64();
        out = out.peak_normalize(T::of(CLIP_GUARD_PEAK));
    }
    Ok(ReplayOutcome {
        audio: out,
        mix,
        post_scale,
    })
}

#[derive(Debug, Default, Deserialize)]
struct RirMeta {
    #[serde(default)]
    mic: String,
    #[serde(default)]
    speaker: String,
}

/// A loaded bank plus the entries that had to be skipped.
#[derive(Debug)]
pub struct BankLoad<T = f64> {
    pub bank: RirBank<T>,
    pub warnings: Vec<String>,
}

/// Loads a bank from `<dir>/<uid>/RIR.wav` (with optional `meta.json` giving
/// mic and speaker names). Unreadable or empty impulse responses are skipped
/// and reported in `warnings`; a bank with no usable entries is an error.
pub fn load_rir_bank<T: Sample>(dir: impl AsRef<Path>) -> Result<BankLoad<T>, ReplayError> {
    let dir = dir.as_ref();
    let read = std::fs::read_dir(dir).map_err(|e| ReplayError::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let mut subdirs: Vec<PathBuf> = read
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();

    let mut entries = BTreeMap::new();
    let mut warnings = Vec::new();
    for sub in subdirs {
        let uid = match sub.file_name().and_then(|n| n.to_str()) {
            Some(name) => name.to_owned(),
            None => {
                warnings.push(format!("{}: non-utf8 directory name", sub.display()));
                continue;
            }
        };
        let wav_path = sub.join("RIR.wav");
        let impulse: AudioBuffer<T> = match read_wav(&wav_path) {
            Ok(buf) => buf,
            Err(e) => {
                warnings.push(format!("{uid}: {e}"));
                continue;
            }
        };
        if impulse.is_empty() {
            warnings.push(format!("{uid}: impulse response is empty"));
            continue;
        }
        let meta_path = sub.join("meta.json");
        let meta = if meta_path.exists() {
            match std::fs::read_to_string(&meta_path)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str::<RirMeta>(&t).map_err(|e| e.to_string()))
            {
                Ok(meta) => meta,
                Err(e) => {
                    warnings.push(format!("{uid}: meta.json ignored: {e}"));
                    RirMeta::default()
                }
            }
        } else {
            RirMeta::default()
        };
        entries.insert(
            uid.clone(),
            Rir {
                impulse,
                uid,
                mic: meta.mic,
                speaker: meta.speaker,
            },
        );
    }
    if entries.is_empty() {
        return Err(ReplayError::EmptyBank {
            dir: dir.display().to_string(),
        });
    }
    Ok(BankLoad {
        bank: RirBank { entries },
        warnings,
    })
}

/// Per-entry augmentation decision: whether to augment and which bank index
/// to use. Depends only on `(seed, file_id)`, so the outcome is stable under
/// any parallel schedule.
pub fn augment_decision(
    seed: u64,
    file_id: &str,
    probability: f64,
    bank_len: usize,
) -> Option<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["augment", file_id]));
    let u: f64 = rng.random();
    if u < probability {
        Some(rng.random_range(0..bank_len))
    } else {
        None
    }
}

/// One entry that could not be augmented.
#[derive(Debug)]
pub struct AugmentFailure {
    pub original_file: String,
    pub message: String,
}

#[derive(Debug)]
pub struct AugmentOutcome {
    pub manifest: Manifest,
    pub augmented: usize,
    pub failures: Vec<AugmentFailure>,
}

/// Convolves each manifest entry with a bank RIR with the given probability,
/// writing processed audio under `root/out_subdir` (mirroring the source
/// tree) and recording the new path, uid, mic, and speaker in the returned
/// manifest. Entries that fail to process keep their original row and are
/// reported in `failures`. Probability zero returns the manifest unchanged
/// without touching the filesystem.
pub fn augment_manifest(
    manifest: &Manifest,
    bank: &RirBank<f64>,
    probability: f64,
    seed: u64,
    root: &Path,
    out_subdir: &str,
) -> Result<AugmentOutcome, ReplayError> {
    if !(0.0..=1.0).contains(&probability) {
        return Err(ReplayError::InvalidProbability(probability));
    }
    if bank.is_empty() {
        return Err(ReplayError::EmptyBank {
            dir: "<bank>".into(),
        });
    }
    if probability == 0.0 {
        return Ok(AugmentOutcome {
            manifest: manifest.clone(),
            augmented: 0,
            failures: Vec::new(),
        });
    }

    let uids = bank.uids();
    let results: Vec<Result<Option<ManifestEntry>, AugmentFailure>> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let pick = augment_decision(seed, &entry.original_file, probability, bank.len());
            let Some(idx) = pick else {
                return Ok(None);
            };
            let rir = bank.get(uids[idx]).expect("uid from bank listing");
            augment_entry(entry, rir, root, out_subdir)
                .map(Some)
                .map_err(|e| AugmentFailure {
                    original_file: entry.original_file.clone(),
                    message: e.to_string(),
                })
        })
        .collect();

    let mut out = manifest.clone();
    let mut augmented = 0;
    let mut failures = Vec::new();
    for (slot, result) in out.entries.iter_mut().zip(results) {
        match result {
            Ok(Some(entry)) => {
                *slot = entry;
                augmented += 1;
            }
            Ok(None) => {}
            Err(failure) => failures.push(failure),
        }
    }
    Ok(AugmentOutcome {
        manifest: out,
        augmented,
        failures,
    })
}

fn augment_entry(
    entry: &ManifestEntry,
    rir: &Rir<f64>,
    root: &Path,
    out_subdir: &str,
) -> Result<ManifestEntry, ReplayError> {
    let signal: AudioBuffer<f64> = read_wav(root.join(&entry.original_file))?;
    let impulse = if rir.impulse.sample_rate == signal.sample_rate {
        rir.clone()
    } else {
        Rir {
            impulse: resample(&rir.impulse, signal.sample_rate)?,
            uid: rir.uid.clone(),
            mic: rir.mic.clone(),
            speaker: rir.speaker.clone(),
        }
    };
    let processed = simulate_replay(&signal, &impulse, None)?.audio;

    let rel = Path::new(out_subdir).join(&entry.original_file);
    let out_path = root.join(&rel);
    if let Some(parent) = out_path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| ReplayError::Io {
            path: parent.display().to_string(),
            source: e,
        })?;
    }
    write_wav(&out_path, &processed, WavEncoding::Float32)?;

    let mut new_entry = entry.clone();
    new_entry.recorded_file = rel
        .to_str()
        .expect("utf8 path built from utf8 parts")
        .to_owned();
    new_entry.uid = rir.uid.clone();
    new_entry.mic = rir.mic.clone();
    new_entry.speaker = rir.speaker.clone();
    Ok(new_entry)
}
