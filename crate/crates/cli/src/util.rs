//! Shared plumbing: failure classification, path rules, flag types, and the
//! per-file metadata rows written next to processed audio.

use std::path::{Component, Path, PathBuf};
use std::str::FromStr;

use airgap_core::audio::AudioBuffer;
use airgap_core::detector::{extract_features, FeatureConfig, FeatureVector};
use airgap_core::manifest::ManifestEntry;
use airgap_core::noise::{NoiseKind, SnrTarget};
use airgap_core::resample::resample;
use airgap_core::wav::{read_wav, write_wav, WavEncoding};
use serde::{Deserialize, Serialize};

/// A failed run, split by who has to act: exit 2 when the flags or input
/// data need fixing, exit 1 when the run itself broke.
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Input(_) => 2,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Internal(e) => e,
        }
    }
}

pub fn input_error(message: impl Into<String>) -> Failure {
    Failure::Input(anyhow::anyhow!(message.into()))
}

pub fn internal_error(message: impl Into<String>) -> Failure {
    Failure::Internal(anyhow::anyhow!(message.into()))
}

/// Context-adding shorthands for fallible calls.
pub trait FailCtx<T> {
    fn or_input(self, what: &str) -> Result<T, Failure>;
    fn or_internal(self, what: &str) -> Result<T, Failure>;
}

impl<T, E> FailCtx<T> for Result<T, E>
where
    E: std::error::Error + Send + Sync + 'static,
{
    fn or_input(self, what: &str) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(anyhow::Error::new(e).context(what.to_owned())))
    }

    fn or_internal(self, what: &str) -> Result<T, Failure> {
        self.map_err(|e| Failure::Internal(anyhow::Error::new(e).context(what.to_owned())))
    }
}

pub fn require<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| {
        input_error(format!(
            "missing --{flag}: pass the flag or set `{flag}` in the config file"
        ))
    })
}

/// Resolves a path flag against the root; absolute paths pass through.
pub fn resolve(root: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        root.join(p)
    }
}

/// Output directories that end up inside manifest paths must stay inside
/// the root, so they are restricted to plain relative subpaths.
pub fn check_subdir<'a>(path: &'a str, flag: &str) -> Result<&'a str, Failure> {
    let p = Path::new(path);
    let plain = !p.is_absolute()
        && p.components()
            .all(|c| matches!(c, Component::Normal(_)));
    if plain && !path.is_empty() {
        Ok(path)
    } else {
        Err(input_error(format!(
            "--{flag} must be a relative subdirectory of --root (got `{path}`)"
        )))
    }
}

/// `--snr` flag: a single dB value or an inclusive `lo..hi` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrArg(pub SnrTarget);

impl FromStr for SnrArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad SNR `{s}`: use a dB value like `20` or a range like `15..40`");
        if let Some((lo, hi)) = s.split_once("..") {
            let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
            Ok(SnrArg(SnrTarget::Range { lo, hi }))
        } else {
            let v: f64 = s.trim().parse().map_err(|_| bad())?;
            Ok(SnrArg(SnrTarget::Fixed(v)))
        }
    }
}

impl<'de> Deserialize<'de> for SnrArg {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) => Ok(SnrArg(SnrTarget::Fixed(v))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Float32,
    Pcm16,
}

impl From<Encoding> for WavEncoding {
    fn from(e: Encoding) -> Self {
        match e {
            Encoding::Float32 => WavEncoding::Float32,
            Encoding::Pcm16 => WavEncoding::Pcm16,
        }
    }
}

/// First line of a metadata JSONL file: the command and its effective seed,
/// so a run can be reproduced from its outputs alone.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub command: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_kind: Option<NoiseKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_snr_db: Option<SnrTarget>,
}

/// One metadata line per manifest entry, in manifest order. `error` marks a
/// failed entry (the run exits nonzero); `skipped` marks a harmless skip.
#[derive(Debug, Default, Serialize, Deserialize)]
pub struct FileRow {
    pub input: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rir_uid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drawn_snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub achieved_snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Creates the directory an output file will land in.
pub fn ensure_parent(path: &Path) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .or_internal(&format!("creating directory {}", parent.display()))?;
    }
    Ok(())
}

/// Writes the run header plus one row per entry as JSON lines.
pub fn write_metadata(path: &Path, meta: &RunMeta, rows: &[FileRow]) -> Result<(), Failure> {
    let mut text = String::new();
    text.push_str(&serde_json::to_string(meta).expect("meta serializes"));
    text.push('\n');
    for row in rows {
        text.push_str(&serde_json::to_string(row).expect("row serializes"));
        text.push('\n');
    }
    ensure_parent(path)?;
    std::fs::write(path, text)
        .or_internal(&format!("writing metadata to {}", path.display()))
}

/// Writes processed audio under `root/subdir/rel`, creating directories as
/// needed, and returns the root-relative output path.
pub fn write_under(
    root: &Path,
    subdir: &str,
    rel: &str,
    buffer: &AudioBuffer<f64>,
    encoding: WavEncoding,
) -> Result<String, String> {
    let rel_out = format!("{subdir}/{rel}");
    let path = root.join(&rel_out);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| format!("creating {}: {e}", parent.display()))?;
    }
    write_wav(&path, buffer, encoding).map_err(|e| e.to_string())?;
    Ok(rel_out)
}

/// Loads one manifest entry's audio (recorded take when present), resampled
/// to the feature rate, and extracts its feature vector.
pub fn load_features(
    entry: &ManifestEntry,
    root: &Path,
    config: &FeatureConfig,
) -> Result<FeatureVector<f64>, String> {
    let rel = entry.file_id();
    let context = |e: &dyn std::fmt::Display| format!("{rel}: {e}");
    let audio: AudioBuffer<f64> = read_wav(root.join(rel)).map_err(|e| context(&e))?;
    let audio = if audio.sample_rate == config.sample_rate {
        audio
    } else {
        resample(&audio, config.sample_rate).map_err(|e| context(&e))?
    };
    extract_features(&audio, config).map_err(|e| context(&e))
}

/// Formats the first few failure messages plus a count of the rest.
pub fn summarize_failures(what: &str, messages: &[String]) -> String {
    let shown = messages.iter().take(10).cloned().collect::<Vec<_>>();
    let more = messages.len().saturating_sub(shown.len());
    let mut out = format!("{} {what} failed:\n  {}", messages.len(), shown.join("\n  "));
    if more > 0 {
        out.push_str(&format!("\n  ... and {more} more"));
    }
    out
}
