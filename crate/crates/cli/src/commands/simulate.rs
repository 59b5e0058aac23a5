//! `simulate`: play each manifest clip through its setup's RIR, optionally
//! over a noise floor, and write the recorded takes plus an updated manifest.

use std::path::Path;

use airgap_core::audio::AudioBuffer;
use airgap_core::manifest::{read_manifest, write_manifest, ManifestEntry};
use airgap_core::noise::{NoiseKind, NoiseSpec, SnrTarget};
use airgap_core::replay::{load_rir_bank, simulate_replay, Rir, RirBank};
use airgap_core::resample::resample;
use airgap_core::seed::derive_seed;
use airgap_core::wav::read_wav;
use clap::Args;
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::Merge;
use crate::util::{
    check_subdir, ensure_parent, input_error, internal_error, require, resolve, write_metadata,
    write_under, Encoding, FailCtx, Failure, FileRow, RunMeta, SnrArg,
};

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct SimulateArgs {
    /// Input manifest (JSON lines).
    #[arg(long)]
    pub manifest: Option<String>,
    /// RIR bank directory: one `<uid>/RIR.wav` per setup.
    #[arg(long)]
    pub rir_dir: Option<String>,
    /// Output subdirectory under --root for the recorded takes.
    #[arg(long)]
    pub out: Option<String>,
    /// Updated manifest path [default: <out>/manifest.jsonl].
    #[arg(long)]
    pub out_manifest: Option<String>,
    /// Per-file metadata path [default: <out>/metadata.jsonl].
    #[arg(long)]
    pub metadata: Option<String>,
    /// Seed for the noise floor draws [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Noise floor kind; requires --snr.
    #[arg(long)]
    pub noise_kind: Option<NoiseKind>,
    /// Noise floor SNR in dB: a value or a `lo..hi` range; requires
    /// --noise-kind.
    #[arg(long)]
    pub snr: Option<SnrArg>,
    /// Output sample encoding [default: float32].
    #[arg(long)]
    pub encoding: Option<Encoding>,
}

impl Merge for SimulateArgs {
    fn or(self, fallback: Self) -> Self {
        Self {
            manifest: self.manifest.or(fallback.manifest),
            rir_dir: self.rir_dir.or(fallback.rir_dir),
            out: self.out.or(fallback.out),
            out_manifest: self.out_manifest.or(fallback.out_manifest),
            metadata: self.metadata.or(fallback.metadata),
            seed: self.seed.or(fallback.seed),
            noise_kind: self.noise_kind.or(fallback.noise_kind),
            snr: self.snr.or(fallback.snr),
            encoding: self.encoding.or(fallback.encoding),
        }
    }
}

/// The bank RIR for one entry: its setup's by uid, or the only one when the
/// bank has a single setup.
fn pick_rir<'a>(bank: &'a RirBank<f64>, entry: &ManifestEntry) -> Result<&'a Rir<f64>, String> {
    if let Some(rir) = bank.get(&entry.uid) {
        return Ok(rir);
    }
    if bank.len() == 1 {
        return Ok(bank.iter().next().expect("non-empty bank"));
    }
    Err(format!(
        "{}: no RIR for setup `{}` in the bank",
        entry.original_file, entry.uid
    ))
}

fn process_entry(
    entry: &ManifestEntry,
    root: &Path,
    out: &str,
    bank: &RirBank<f64>,
    noise: Option<(NoiseKind, SnrTarget)>,
    seed: u64,
    encoding: Encoding,
) -> Result<(ManifestEntry, FileRow), String> {
    let rel = entry.original_file.as_str();
    let audio: AudioBuffer<f64> =
        read_wav(root.join(rel)).map_err(|e| format!("{rel}: {e}"))?;
    let picked = pick_rir(bank, entry)?;
    let rir = if picked.impulse.sample_rate == audio.sample_rate {
        picked.clone()
    } else {
        Rir {
            impulse: resample(&picked.impulse, audio.sample_rate)
                .map_err(|e| format!("{rel}: resampling RIR: {e}"))?,
            uid: picked.uid.clone(),
            mic: picked.mic.clone(),
            speaker: picked.speaker.clone(),
        }
    };
    let spec = noise.map(|(kind, target_snr_db)| NoiseSpec {
        kind,
        seed: derive_seed(seed, &["simulate", rel]),
        target_snr_db,
    });
    let outcome =
        simulate_replay(&audio, &rir, spec.as_ref()).map_err(|e| format!("{rel}: {e}"))?;
    let rel_out = write_under(root, out, rel, &outcome.audio, encoding.into())?;

    let mut updated = entry.clone();
    updated.recorded_file = rel_out.clone();
    updated.mic = rir.mic.clone();
    updated.speaker = rir.speaker.clone();
    let row = FileRow {
        input: rel.to_owned(),
        output: Some(rel_out),
        rir_uid: Some(rir.uid.clone()),
        seed: outcome.mix.map(|m| m.seed),
        drawn_snr_db: outcome.mix.map(|m| m.drawn_snr_db),
        achieved_snr_db: outcome.mix.map(|m| m.achieved_snr_db),
        gain: outcome.mix.map(|m| m.gain),
        post_scale: Some(outcome.post_scale),
        ..FileRow::default()
    };
    Ok((updated, row))
}

pub fn run(args: SimulateArgs, root: &Path) -> Result<(), Failure> {
    let manifest_path = require(args.manifest, "manifest")?;
    let rir_dir = require(args.rir_dir, "rir-dir")?;
    let out = require(args.out, "out")?;
    let out = check_subdir(&out, "out")?;
    let seed = args.seed.unwrap_or(0);
    let encoding = args.encoding.unwrap_or(Encoding::Float32);
    let noise = match (args.noise_kind, args.snr) {
        (Some(kind), Some(snr)) => Some((kind, snr.0)),
        (None, None) => None,
        _ => {
            return Err(input_error(
                "--noise-kind and --snr must be used together",
            ))
        }
    };
    let out_manifest = args
        .out_manifest
        .unwrap_or_else(|| format!("{out}/manifest.jsonl"));
    let metadata = args
        .metadata
        .unwrap_or_else(|| format!("{out}/metadata.jsonl"));

    let mut manifest =
        read_manifest(resolve(root, &manifest_path)).or_input("reading the manifest")?;
    let loaded =
        load_rir_bank::<f64>(resolve(root, &rir_dir)).or_input("loading the RIR bank")?;
    for warning in &loaded.warnings {
        log::warn!("{warning}");
    }
    let bank = loaded.bank;

    let results: Vec<(ManifestEntry, FileRow)> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            process_entry(entry, root, out, &bank, noise, seed, encoding).unwrap_or_else(
                |message| {
                    let row = FileRow {
                        input: entry.original_file.clone(),
                        error: Some(message),
                        ..FileRow::default()
                    };
                    (entry.clone(), row)
                },
            )
        })
        .collect();

    let (entries, rows): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    manifest.entries = entries;
    manifest.seed = Some(seed);

    let out_manifest_path = resolve(root, &out_manifest);
    ensure_parent(&out_manifest_path)?;
    write_manifest(&manifest, &out_manifest_path)
        .or_internal("writing the updated manifest")?;
    let meta = RunMeta {
        command: "simulate".into(),
        seed,
        noise_kind: noise.map(|(k, _)| k),
        target_snr_db: noise.map(|(_, t)| t),
    };
    write_metadata(&resolve(root, &metadata), &meta, &rows)?;

    let failures: Vec<&FileRow> = rows.iter().filter(|r| r.error.is_some()).collect();
    for row in &failures {
        log::error!("{}", row.error.as_deref().unwrap_or_default());
    }
    println!(
        "simulated {} of {} clips into {} (seed {}), manifest {}",
        rows.len() - failures.len(),
        rows.len(),
        out,
        seed,
        out_manifest,
    );
    if failures.is_empty() {
        Ok(())
    } else {
        Err(internal_error(format!(
            "{} of {} clips failed, see the log and {}",
            failures.len(),
            rows.len(),
            metadata,
        )))
    }
}
