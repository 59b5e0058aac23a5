//! `augment`: convolve a random share of manifest entries with bank RIRs,
//! producing a training manifest that mixes clean and replayed takes.

use std::path::Path;

use airgap_core::manifest::{read_manifest, write_manifest};
use airgap_core::replay::{augment_manifest, load_rir_bank};
use clap::Args;
use serde::Deserialize;

use crate::config::Merge;
use crate::util::{
    check_subdir, ensure_parent, internal_error, require, resolve, summarize_failures, FailCtx,
    Failure,
};

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct AugmentArgs {
    /// Input manifest (JSON lines).
    #[arg(long)]
    pub manifest: Option<String>,
    /// RIR bank directory: one `<uid>/RIR.wav` per setup.
    #[arg(long)]
    pub rir_dir: Option<String>,
    /// Probability that an entry is replayed, in [0, 1].
    #[arg(long)]
    pub probability: Option<f64>,
    /// Seed for the per-entry decisions [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output subdirectory under --root for the replayed takes.
    #[arg(long)]
    pub out: Option<String>,
    /// Output manifest path (JSON lines).
    #[arg(long)]
    pub out_manifest: Option<String>,
}

impl Merge for AugmentArgs {
    fn or(self, fallback: Self) -> Self {
        Self {
            manifest: self.manifest.or(fallback.manifest),
            rir_dir: self.rir_dir.or(fallback.rir_dir),
            probability: self.probability.or(fallback.probability),
            seed: self.seed.or(fallback.seed),
            out: self.out.or(fallback.out),
            out_manifest: self.out_manifest.or(fallback.out_manifest),
        }
    }
}

pub fn run(args: AugmentArgs, root: &Path) -> Result<(), Failure> {
    let manifest_path = require(args.manifest, "manifest")?;
    let rir_dir = require(args.rir_dir, "rir-dir")?;
    let probability = require(args.probability, "probability")?;
    let out = require(args.out, "out")?;
    let out = check_subdir(&out, "out")?;
    let out_manifest = require(args.out_manifest, "out-manifest")?;
    let seed = args.seed.unwrap_or(0);

    let manifest =
        read_manifest(resolve(root, &manifest_path)).or_input("reading the manifest")?;
    let loaded =
        load_rir_bank::<f64>(resolve(root, &rir_dir)).or_input("loading the RIR bank")?;
    for warning in &loaded.warnings {
        log::warn!("{warning}");
    }

    let mut outcome = augment_manifest(&manifest, &loaded.bank, probability, seed, root, out)
        .or_input("augmenting the manifest")?;
    outcome.manifest.seed = Some(seed);
    let out_manifest_path = resolve(root, &out_manifest);
    ensure_parent(&out_manifest_path)?;
    write_manifest(&outcome.manifest, &out_manifest_path)
        .or_internal("writing the augmented manifest")?;

    println!(
        "augmented {} of {} entries into {} (probability {}, seed {}), manifest {}",
        outcome.augmented,
        outcome.manifest.entries.len(),
        out,
        probability,
        seed,
        out_manifest,
    );
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        let messages: Vec<String> = outcome
            .failures
            .iter()
            .map(|f| format!("{}: {}", f.original_file, f.message))
            .collect();
        Err(internal_error(summarize_failures("entries", &messages)))
    }
}
