//! Detection and signal-quality metrics.
//!
//! Scores are spoof-likelihoods: higher means more likely spoofed. The equal
//! error rate sweeps every distinct score as a threshold, counting the false
//! acceptance rate (bona fide scored at or above the threshold) against the
//! false rejection rate (spoof scored below it), and linearly interpolates
//! where their difference changes sign.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::AudioBuffer;
use crate::fft::FrameSpectrum;
use crate::manifest::{Architecture, Label, Manifest};
use crate::sample::Sample;

/// Analysis frame length for segmental metrics, in seconds.
pub const SEGMENT_SECS: f64 = 0.032;

/// Per-frame SNR clamp range in dB.
pub const SEGSNR_MIN_DB: f64 = -10.0;
pub const SEGSNR_MAX_DB: f64 = 35.0;

/// Reference frames with energy at or below this are treated as silent and
/// skipped by segmental metrics.
pub const SILENCE_ENERGY: f64 = 1e-20;

/// Floor applied inside every log-magnitude computation.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no score records")]
    Empty,
    #[error("all records have the same label; both classes are required")]
    SingleClass,
    #[error("record `{file_id}` has no label and none could be joined")]
    MissingLabel { file_id: String },
    #[error("{count} score ids not present in the manifest, first: {first:?}")]
    UnjoinableIds { count: usize, first: Vec<String> },
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("sample rate mismatch: {a} Hz vs {b} Hz")]
    RateMismatch { a: u32, b: u32 },
    #[error("need at least {need} values, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("{which} has zero variance, correlation is undefined")]
    ZeroVariance { which: &'static str },
    #[error("signal too short: {len} samples, need at least {frame}")]
    TooShort { len: usize, frame: usize },
    #[error("every reference frame is silent")]
    AllSilent,
    #[error("{path}:{row}: {detail}")]
    Csv {
        path: String,
        row: usize,
        detail: String,
    },
    #[error("i/o error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One scored trial clip. `label` may be joined later from a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub file_id: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EerResult {
    pub eer: f64,
    pub threshold: f64,
    pub num_spoof: usize,
    pub num_bona: usize,
}

fn split_by_label(records: &[ScoreRecord]) -> Result<(Vec<f64>, Vec<f64>), MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut spoof = Vec::new();
    let mut bona = Vec::new();
    for r in records {
        match r.label {
            Some(Label::Spoof) => spoof.push(r.score),
            Some(Label::BonaFide) => bona.push(r.score),
            None => {
                return Err(MetricsError::MissingLabel {
                    file_id: r.file_id.clone(),
                })
            }
        }
    }
    if spoof.is_empty() || bona.is_empty() {
        return Err(MetricsError::SingleClass);
    }
    Ok((spoof, bona))
}

/// Equal error rate over labeled records.
pub fn compute_eer(records: &[ScoreRecord]) -> Result<EerResult, MetricsError> {
    let (spoof, bona) = split_by_label(records)?;
    Ok(eer_from_scores(&spoof, &bona))
}

/// Equal error rate from class score lists.
///
/// At threshold `t`: FAR is the fraction of bona fide with `score >= t`, FRR
/// the fraction of spoof with `score < t`. FAR - FRR starts at +1 for the
/// lowest score and reaches -1 at a sentinel above the highest, so a sign
/// change always exists; the EER is interpolated there. Ties resolve toward
/// the lower threshold. One merge pass over the sorted classes, so the cost
/// is the sort.
pub fn eer_from_scores(spoof: &[f64], bona: &[f64]) -> EerResult {
    assert!(!spoof.is_empty() && !bona.is_empty());
    let mut spoof_sorted = spoof.to_vec();
    spoof_sorted.sort_by(f64::total_cmp);
    let mut bona_sorted = bona.to_vec();
    bona_sorted.sort_by(f64::total_cmp);
    let mut thresholds: Vec<f64> = spoof.iter().chain(bona).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let done = |eer: f64, threshold: f64| EerResult {
        eer,
        threshold,
        num_spoof: spoof.len(),
        num_bona: bona.len(),
    };

    // Running counts of scores below the current threshold; thresholds only
    // grow, so each pointer advances once across the sweep.
    let mut spoof_below = 0usize;
    let mut bona_below = 0usize;
    let mut rates = |t: f64| {
        while spoof_sorted.get(spoof_below).is_some_and(|&s| s < t) {
            spoof_below += 1;
        }
        while bona_sorted.get(bona_below).is_some_and(|&s| s < t) {
            bona_below += 1;
        }
        let far = (bona_sorted.len() - bona_below) as f64 / bona_sorted.len() as f64;
        let frr = spoof_below as f64 / spoof_sorted.len() as f64;
        (far, frr)
    };

    let mut prev_t = thresholds[0];
    let (mut prev_far, mut prev_frr) = rates(prev_t);
    if prev_far - prev_frr == 0.0 {
        return done(prev_far, prev_t);
    }
    // Sentinel operating point past the top score: everything accepted as
    // bona fide, so FAR 0 and FRR 1.
    for i in 1..=thresholds.len() {
        let (t, far, frr) = if i < thresholds.len() {
            let t = thresholds[i];
            let (far, frr) = rates(t);
            (t, far, frr)
        } else {
            (prev_t, 0.0, 1.0)
        };
        let d = far - frr;
        if d == 0.0 {
            return done(far, t);
        }
        let prev_d = prev_far - prev_frr;
        if prev_d > 0.0 && d < 0.0 {
            let alpha = prev_d / (prev_d - d);
            let eer = prev_far + alpha * (far - prev_far);
            let threshold = if i < thresholds.len() {
                prev_t + alpha * (t - prev_t)
            } else {
                // Crossing beyond the real score range; report the top score.
                prev_t
            };
            return done(eer, threshold);
        }
        prev_t = t;
        prev_far = far;
        prev_frr = frr;
    }
    unreachable!("sentinel guarantees a sign change");
}

/// Fraction of labeled records classified correctly when scores strictly
/// above `threshold` count as spoof.
pub fn accuracy_at_threshold(
    records: &[ScoreRecord],
    threshold: f64,
) -> Result<f64, MetricsError> {
    let (spoof, bona) = split_by_label(records)?;
    let correct = spoof.iter().filter(|&&s| s > threshold).count()
        + bona.iter().filter(|&&s| s <= threshold).count();
    Ok(correct as f64 / (spoof.len() + bona.len()) as f64)
}

/// Report grouping: one row per spoof architecture plus one for bona fide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttackGroup {
    Attack(Architecture),
    BonaFide,
}

impl fmt::Display for AttackGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackGroup::Attack(a) => f.write_str(a.code()),
            AttackGroup::BonaFide => f.write_str("bona fide"),
        }
    }
}

impl AttackGroup {
    pub fn display_name(&self) -> &'static str {
        match self {
            AttackGroup::Attack(a) => a.display_name(),
            AttackGroup::BonaFide => "bona fide",
        }
    }
}

/// Joins score records to manifest entries by file id. The manifest label
/// and architecture win over anything in the records. Ids that match no
/// entry are an error listing the first few offenders.
pub fn join_records<'m>(
    records: &[ScoreRecord],
    manifest: &'m Manifest,
) -> Result<Vec<(ScoreRecord, &'m crate::manifest::ManifestEntry)>, MetricsError> {
    let mut by_id: BTreeMap<&str, &crate::manifest::ManifestEntry> = BTreeMap::new();
    for entry in &manifest.entries {
        if !entry.recorded_file.is_empty() {
            by_id.insert(entry.recorded_file.as_str(), entry);
        }
        by_id.entry(entry.original_file.as_str()).or_insert(entry);
    }
    let mut joined = Vec::with_capacity(records.len());
    let mut missing = Vec::new();
    for record in records {
        match by_id.get(record.file_id.as_str()) {
            Some(entry) => {
                let mut r = record.clone();
                r.label = Some(entry.label);
                joined.push((r, *entry));
            }
            None => missing.push(record.file_id.clone()),
        }
    }
    if !missing.is_empty() {
        let count = missing.len();
        missing.truncate(10);
        return Err(MetricsError::UnjoinableIds {
            count,
            first: missing,
        });
    }
    Ok(joined)
}

/// Accuracy per attack group at a fixed threshold, after joining records to
/// the manifest.
pub fn per_attack_accuracy(
    records: &[ScoreRecord],
    manifest: &Manifest,
    threshold: f64,
) -> Result<BTreeMap<AttackGroup, f64>, MetricsError> {
    let joined = join_records(records, manifest)?;
    if joined.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut totals: BTreeMap<AttackGroup, (usize, usize)> = BTreeMap::new();
    for (record, entry) in &joined {
        let group = match (entry.label, entry.architecture) {
            (Label::BonaFide, _) => AttackGroup::BonaFide,
            (Label::Spoof, Some(arch)) => AttackGroup::Attack(arch),
            // Spoof without architecture: counted against the label only.
            (Label::Spoof, None) => continue,
        };
        let correct = match entry.label {
            Label::Spoof => record.score > threshold,
            Label::BonaFide => record.score <= threshold,
        };
        let slot = totals.entry(group).or_default();
        slot.0 += 1;
        if correct {
            slot.1 += 1;
        }
    }
    Ok(totals
        .into_iter()
        .map(|(group, (n, c))| (group, c as f64 / n as f64))
        .collect())
}

/// Pearson correlation coefficient. Needs at least two pairs and nonzero
/// variance on both sides.
pub fn pearson<T: Sample>(x: &[T], y: &[T]) -> Result<f64, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch { a: x.len(), b: y.len() });
    }
    if x.len() < 2 {
        return Err(MetricsError::TooFew { need: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().map(|v| v.to64()).sum::<f64>() / n;
    let my = y.iter().map(|v| v.to64()).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a.to64() - mx;
        let dy = b.to64() - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 {
        return Err(MetricsError::ZeroVariance { which: "x" });
    }
    if vy == 0.0 {
        return Err(MetricsError::ZeroVariance { which: "y" });
    }
    Ok(cov / (vx * vy).sqrt())
}

fn check_pair<T: Sample>(
    reference: &AudioBuffer<T>,
    degraded: &AudioBuffer<T>,
) -> Result<usize, MetricsError> {
    if reference.sample_rate != degraded.sample_rate {
        return Err(MetricsError::RateMismatch {
            a: reference.sample_rate,
            b: degraded.sample_rate,
        });
    }
    if reference.len() != degraded.len() {
        return Err(MetricsError::LengthMismatch {
            a: reference.len(),
            b: degraded.len(),
        });
    }
    let frame = (SEGMENT_SECS * f64::from(reference.sample_rate)).round() as usize;
    if reference.len() < frame {
        return Err(MetricsError::TooShort {
            len: reference.len(),
            frame,
        });
    }
    Ok(frame)
}

/// Mean per-frame SNR in dB over 32 ms frames with 50% overlap. Frames are
/// clamped to [[`SEGSNR_MIN_DB`], [`SEGSNR_MAX_DB`]]; silent reference
/// frames are skipped. Identical signals therefore score the clamp maximum.
pub fn segmental_snr<T: Sample>(
    reference: &AudioBuffer<T>,
    degraded: &AudioBuffer<T>,
) -> Result<f64, MetricsError> {
    let frame = check_pair(reference, degraded)?;
    let hop = (frame / 2).max(1);
    let mut sum = 0.0;
    let mut kept = 0usize;
    let mut start = 0usize;
    while start + frame <= reference.len() {
        let mut e_ref = 0.0f64;
        let mut e_err = 0.0f64;
        for i in start..start + frame {
            let r = reference.samples[i].to64();
            let d = degraded.samples[i].to64();
            e_ref += r * r;
            e_err += (r - d) * (r - d);
        }
        if e_ref > SILENCE_ENERGY {
            let snr = if e_err > 0.0 {
                10.0 * (e_ref / e_err).log10()
            } else {
                f64::INFINITY
            };
            sum += snr.clamp(SEGSNR_MIN_DB, SEGSNR_MAX_DB);
            kept += 1;
        }
        start += hop;
    }
    if kept == 0 {
        return Err(MetricsError::AllSilent);
    }
    Ok(sum / kept as f64)
}

/// Root-mean-square distance between log-magnitude spectra in dB, framed
/// like [`segmental_snr`] and Hann-windowed. A flat gain of 2 scores
/// `20*log10(2) = 6.02` dB.
pub fn log_spectral_distance<T: Sample>(
    reference: &AudioBuffer<T>,
    degraded: &AudioBuffer<T>,
) -> Result<f64, MetricsError> {
    let frame = check_pair(reference, degraded)?;
    let hop = (frame / 2).max(1);
    let mut spectrum = FrameSpectrum::<T>::new(frame);
    let mut mags_ref = Vec::new();
    let mut mags_deg = Vec::new();
    let mut sum_sq = 0.0;
    let mut frames = 0usize;
    let mut start = 0usize;
    while start + frame <= reference.len() {
        spectrum.magnitudes(&reference.samples[start..start + frame], &mut mags_ref);
        spectrum.magnitudes(&degraded.samples[start..start + frame], &mut mags_deg);
        let mut acc = 0.0f64;
        for (r, d) in mags_ref.iter().zip(&mags_deg) {
            let lr = 20.0 * r.to64().max(LOG_FLOOR).log10();
            let ld = 20.0 * d.to64().max(LOG_FLOOR).log10();
            acc += (lr - ld) * (lr - ld);
        }
        sum_sq += acc / mags_ref.len() as f64;
        frames += 1;
        start += hop;
    }
    if frames == 0 {
        return Err(MetricsError::AllSilent);
    }
    Ok((sum_sq / frames as f64).sqrt())
}

/// Per-setup aggregate row: detector accuracy on spoof clips plus optional
/// listener and objective quality scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupQuality {
    pub uid: String,
    pub spoof_accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mos: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pesq: Option<f64>,
}

/// One correlation with its support count. Two points always correlate at
/// `|r| = 1`, so that case is flagged as degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub num_pairs: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub accuracy_vs_mos: Option<Correlation>,
    pub accuracy_vs_pesq: Option<Correlation>,
    pub mos_vs_pesq: Option<Correlation>,
}

fn correlate_pairs(pairs: &[(f64, f64)]) -> Option<Correlation> {
    if pairs.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    pearson(&xs, &ys).ok().map(|r| Correlation {
        r,
        num_pairs: pairs.len(),
        degenerate: pairs.len() == 2,
    })
}

/// Pairwise-complete correlations between per-setup accuracy, MOS, and PESQ.
/// Correlations with fewer than two complete pairs, or zero variance, are
/// reported as absent.
pub fn quality_correlation(rows: &[SetupQuality]) -> CorrelationReport {
    let acc_mos: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.mos.map(|m| (r.spoof_accuracy, m)))
        .collect();
    let acc_pesq: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.pesq.map(|p| (r.spoof_accuracy, p)))
        .collect();
    let mos_pesq: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.mos.zip(r.pesq))
        .collect();
    CorrelationReport {
        accuracy_vs_mos: correlate_pairs(&acc_mos),
        accuracy_vs_pesq: correlate_pairs(&acc_pesq),
        mos_vs_pesq: correlate_pairs(&mos_pesq),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation over trials.
    pub stddev: f64,
}

pub fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    MeanStd {
        mean,
        stddev: var.sqrt(),
    }
}

/// Mean and population standard deviation per metric across repeated trials.
/// Metrics missing from some trials aggregate over the trials that have
/// them.
pub fn aggregate_trials(trials: &[BTreeMap<String, f64>]) -> BTreeMap<String, MeanStd> {
    let mut values: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for trial in trials {
        for (name, &v) in trial {
            values.entry(name).or_default().push(v);
        }
    }
    values
        .into_iter()
        .map(|(name, vs)| (name.to_owned(), mean_std(&vs)))
        .collect()
}

/// Reads a score CSV with columns `file_id,score[,label]`. Extra columns are
/// ignored; malformed rows are reported with their line number.
pub fn read_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRecord>, MetricsError> {
    let path = path.as_ref();
    let csv_err = |row: usize, detail: String| MetricsError::Csv {
        path: path.display().to_string(),
        row,
        detail,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => MetricsError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => csv_err(1, e.to_string()),
    })?;
    let headers = reader.headers().map_err(|e| csv_err(1, e.to_string()))?;
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("file_id").ok_or_else(|| csv_err(1, "missing column `file_id`".into()))?;
    let score_col = col("score").ok_or_else(|| csv_err(1, "missing column `score`".into()))?;
    let label_col = col("label");

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 2;
        let row = row.map_err(|e| csv_err(row_no, e.to_string()))?;
        let file_id = row
            .get(id_col)
            .ok_or_else(|| csv_err(row_no, "missing file_id".into()))?
            .to_owned();
        let score: f64 = row
            .get(score_col)
            .ok_or_else(|| csv_err(row_no, "missing score".into()))?
            .parse()
            .map_err(|e| csv_err(row_no, format!("bad score: {e}")))?;
        let label = match label_col.and_then(|c| row.get(c)) {
            Some("") | None => None,
            Some(text) => Some(
                text.parse::<Label>()
                    .map_err(|e| csv_err(row_no, e))?,
            ),
        };
        records.push(ScoreRecord {
            file_id,
            score,
            label,
        });
    }
    Ok(records)
}

/// Reads a per-setup quality CSV with columns `uid,<value_column>`, checking
/// values against an inclusive range.
pub fn read_quality_csv(
    path: impl AsRef<Path>,
    value_column: &str,
    range: (f64, f64),
) -> Result<BTreeMap<String, f64>, MetricsError> {
    let path = path.as_ref();
    let csv_err = |row: usize, detail: String| MetricsError::Csv {
        path: path.display().to_string(),
        row,
        detail,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => MetricsError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => csv_err(1, e.to_string()),
    })?;
    let headers = reader.headers().map_err(|e| csv_err(1, e.to_string()))?;
    let uid_col = headers
        .iter()
        .position(|h| h == "uid")
        .ok_or_else(|| csv_err(1, "missing column `uid`".into()))?;
    let val_col = headers
        .iter()
        .position(|h| h == value_column)
        .ok_or_else(|| csv_err(1, format!("missing column `{value_column}`")))?;

    let mut out = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 2;
        let row = row.map_err(|e| csv_err(row_no, e.to_string()))?;
        let uid = row
            .get(uid_col)
            .ok_or_else(|| csv_err(row_no, "missing uid".into()))?
            .to_owned();
        let value: f64 = row
            .get(val_col)
            .ok_or_else(|| csv_err(row_no, format!("missing {value_column}")))?
            .parse()
            .map_err(|e| csv_err(row_no, format!("bad {value_column}: {e}")))?;
        if value < range.0 || value > range.1 {
            return Err(csv_err(
                row_no,
                format!(
                    "{value_column} {value} outside [{}, {}]",
                    range.0, range.1
                ),
            ));
        }
        out.insert(uid, value);
    }
    Ok(out)
}

/// Averages raw listener ratings (`uid,rating` rows, one per listener) into
/// per-uid MOS. Returns a warning line for every uid rated by fewer than
/// `min_listeners`.
pub fn mos_from_listener_csv(
    path: impl AsRef<Path>,
    range: (f64, f64),
    min_listeners: usize,
) -> Result<(BTreeMap<String, f64>, Vec<String>), MetricsError> {
    let path = path.as_ref();
    let csv_err = |row: usize, detail: String| MetricsError::Csv {
        path: path.display().to_string(),
        row,
        detail,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => MetricsError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => csv_err(1, e.to_string()),
    })?;
    let headers = reader.headers().map_err(|e| csv_err(1, e.to_string()))?;
    let uid_col = headers
        .iter()
        .position(|h| h == "uid")
        .ok_or_else(|| csv_err(1, "missing column `uid`".into()))?;
    let rating_col = headers
        .iter()
        .position(|h| h == "rating")
        .ok_or_else(|| csv_err(1, "missing column `rating`".into()))?;

    let mut ratings: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 2;
        let row = row.map_err(|e| csv_err(row_no, e.to_string()))?;
        let uid = row
            .get(uid_col)
            .ok_or_else(|| csv_err(row_no, "missing uid".into()))?
            .to_owned();
        let rating: f64 = row
            .get(rating_col)
            .ok_or_else(|| csv_err(row_no, "missing rating".into()))?
            .parse()
            .map_err(|e| csv_err(row_no, format!("bad rating: {e}")))?;
        if rating < range.0 || rating > range.1 {
            return Err(csv_err(
                row_no,
                format!("rating {rating} outside [{}, {}]", range.0, range.1),
            ));
        }
        ratings.entry(uid).or_default().push(rating);
    }
    let mut warnings = Vec::new();
    let mut out = BTreeMap::new();
    for (uid, values) in ratings {
        if values.len() < min_listeners {
            warnings.push(format!(
                "uid {uid}: only {} listener ratings, expected at least {min_listeners}",
                values.len()
            ));
        }
        out.insert(uid.clone(), values.iter().sum::<f64>() / values.len() as f64);
    }
    Ok((out, warnings))
}
