//! `mix-noise`: add colored noise to each manifest clip at a target SNR,
//! without any replay simulation. The noise-only ablation counterpart to
//! `simulate`.

use std::path::Path;

use airgap_core::audio::AudioBuffer;
use airgap_core::manifest::{read_manifest, write_manifest, ManifestEntry};
use airgap_core::noise::{mix_at_snr, NoiseError, NoiseKind, NoiseSpec, SnrTarget};
use airgap_core::seed::derive_seed;
use airgap_core::wav::read_wav;
use clap::Args;
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::Merge;
use crate::util::{
    check_subdir, ensure_parent, internal_error, require, resolve, write_metadata, write_under,
    Encoding, FailCtx, Failure, FileRow, RunMeta, SnrArg,
};

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct MixNoiseArgs {
    /// Input manifest (JSON lines).
    #[arg(long)]
    pub manifest: Option<String>,
    /// Noise kind: gaussian, white, or pink.
    #[arg(long)]
    pub kind: Option<NoiseKind>,
    /// Target SNR in dB: a value or a `lo..hi` range.
    #[arg(long)]
    pub snr: Option<SnrArg>,
    /// Seed for the per-file draws [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output subdirectory under --root for the noisy takes.
    #[arg(long)]
    pub out: Option<String>,
    /// Updated manifest path [default: <out>/manifest.jsonl].
    #[arg(long)]
    pub out_manifest: Option<String>,
    /// Per-file metadata path [default: <out>/metadata.jsonl].
    #[arg(long)]
    pub metadata: Option<String>,
    /// Output sample encoding [default: float32].
    #[arg(long)]
    pub encoding: Option<Encoding>,
}

impl Merge for MixNoiseArgs {
    fn or(self, fallback: Self) -> Self {
        Self {
            manifest: self.manifest.or(fallback.manifest),
            kind: self.kind.or(fallback.kind),
            snr: self.snr.or(fallback.snr),
            seed: self.seed.or(fallback.seed),
            out: self.out.or(fallback.out),
            out_manifest: self.out_manifest.or(fallback.out_manifest),
            metadata: self.metadata.or(fallback.metadata),
            encoding: self.encoding.or(fallback.encoding),
        }
    }
}

enum Mixed {
    Done(ManifestEntry, FileRow),
    /// Left as-is with a reason; not a failure.
    Skipped(FileRow),
    Failed(FileRow),
}

fn mix_entry(
    entry: &ManifestEntry,
    root: &Path,
    out: &str,
    kind: NoiseKind,
    target_snr_db: SnrTarget,
    seed: u64,
    encoding: Encoding,
) -> Mixed {
    let rel = entry.original_file.clone();
    let fail = |message: String| {
        Mixed::Failed(FileRow {
            input: rel.clone(),
            error: Some(message),
            ..FileRow::default()
        })
    };
    let audio: AudioBuffer<f64> = match read_wav(root.join(&rel)) {
        Ok(a) => a,
        Err(e) => return fail(format!("{rel}: {e}")),
    };
    let spec = NoiseSpec {
        kind,
        seed: derive_seed(seed, &["mix", &rel]),
        target_snr_db,
    };
    let mixed = match mix_at_snr(&audio, &spec) {
        Ok(m) => m,
        Err(NoiseError::SilentSignal) => {
            return Mixed::Skipped(FileRow {
                input: rel,
                skipped: Some("silent input, left unmixed".into()),
                ..FileRow::default()
            })
        }
        Err(e) => return fail(format!("{rel}: {e}")),
    };
    let rel_out = match write_under(root, out, &rel, &mixed.mixture, encoding.into()) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let mut updated = entry.clone();
    updated.recorded_file = rel_out.clone();
    Mixed::Done(
        updated,
        FileRow {
            input: rel,
            output: Some(rel_out),
            seed: Some(mixed.seed),
            drawn_snr_db: Some(mixed.drawn_snr_db),
            achieved_snr_db: Some(mixed.achieved_snr_db),
            gain: Some(mixed.gain),
            post_scale: Some(mixed.post_scale),
            ..FileRow::default()
        },
    )
}

pub fn run(args: MixNoiseArgs, root: &Path) -> Result<(), Failure> {
    let manifest_path = require(args.manifest, "manifest")?;
    let kind = require(args.kind, "kind")?;
    let snr = require(args.snr, "snr")?.0;
    let out = require(args.out, "out")?;
    let out = check_subdir(&out, "out")?;
    let seed = args.seed.unwrap_or(0);
    let encoding = args.encoding.unwrap_or(Encoding::Float32);
    let out_manifest = args
        .out_manifest
        .unwrap_or_else(|| format!("{out}/manifest.jsonl"));
    let metadata = args
        .metadata
        .unwrap_or_else(|| format!("{out}/metadata.jsonl"));

    let mut manifest =
        read_manifest(resolve(root, &manifest_path)).or_input("reading the manifest")?;

    let results: Vec<Mixed> = manifest
        .entries
        .par_iter()
        .map(|entry| mix_entry(entry, root, out, kind, snr, seed, encoding))
        .collect();

    let mut entries = Vec::with_capacity(results.len());
    let mut rows = Vec::with_capacity(results.len());
    let (mut skipped, mut failed) = (0usize, 0usize);
    for (original, result) in manifest.entries.iter().zip(results) {
        let (entry, row) = match result {
            Mixed::Done(entry, row) => (entry, row),
            Mixed::Skipped(row) => {
                skipped += 1;
                log::warn!("{}: {}", row.input, row.skipped.as_deref().unwrap_or_default());
                (original.clone(), row)
            }
            Mixed::Failed(row) => {
                failed += 1;
                log::error!("{}", row.error.as_deref().unwrap_or_default());
                (original.clone(), row)
            }
        };
        entries.push(entry);
        rows.push(row);
    }
    manifest.entries = entries;
    manifest.seed = Some(seed);

    let out_manifest_path = resolve(root, &out_manifest);
    ensure_parent(&out_manifest_path)?;
    write_manifest(&manifest, &out_manifest_path)
        .or_internal("writing the updated manifest")?;
    let meta = RunMeta {
        command: "mix-noise".into(),
        seed,
        noise_kind: Some(kind),
        target_snr_db: Some(snr),
    };
    write_metadata(&resolve(root, &metadata), &meta, &rows)?;

    println!(
        "mixed {} of {} clips into {} (seed {}, {} skipped), manifest {}",
        rows.len() - skipped - failed,
        rows.len(),
        out,
        seed,
        skipped,
        out_manifest,
    );
    if failed == 0 {
        Ok(())
    } else {
        Err(internal_error(format!(
            "{failed} of {} clips failed, see the log and {metadata}",
            rows.len(),
        )))
    }
}
