//! `train-baseline`: fit the spectral-statistics detector on a manifest and
//! save the model as JSON.

use std::path::Path;

use airgap_core::detector::{train, FeatureConfig, TrainConfig};
use airgap_core::manifest::{read_manifest, Label};
use clap::Args;
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::Merge;
use crate::util::{
    ensure_parent, input_error, load_features, require, resolve, summarize_failures, FailCtx,
    Failure,
};

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct TrainBaselineArgs {
    /// Training manifest (JSON lines); recorded takes are used when present.
    #[arg(long)]
    pub manifest: Option<String>,
    /// Output model path (JSON).
    #[arg(long)]
    pub out: Option<String>,
    /// Feature sample rate; clips are resampled to it [default: 16000].
    #[arg(long)]
    pub sample_rate: Option<u32>,
    /// Number of mel bands [default: 40].
    #[arg(long)]
    pub bands: Option<usize>,
    /// Analysis frame length in samples [default: 512].
    #[arg(long)]
    pub frame: Option<usize>,
    /// Hop between frames in samples [default: 256].
    #[arg(long)]
    pub hop: Option<usize>,
    /// Gradient descent step size [default: 0.5].
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Maximum training epochs [default: 500].
    #[arg(long)]
    pub epochs: Option<usize>,
}

impl Merge for TrainBaselineArgs {
    fn or(self, fallback: Self) -> Self {
        Self {
            manifest: self.manifest.or(fallback.manifest),
            out: self.out.or(fallback.out),
            sample_rate: self.sample_rate.or(fallback.sample_rate),
            bands: self.bands.or(fallback.bands),
            frame: self.frame.or(fallback.frame),
            hop: self.hop.or(fallback.hop),
            learning_rate: self.learning_rate.or(fallback.learning_rate),
            epochs: self.epochs.or(fallback.epochs),
        }
    }
}

pub fn run(args: TrainBaselineArgs, root: &Path) -> Result<(), Failure> {
    let manifest_path = require(args.manifest, "manifest")?;
    let out = require(args.out, "out")?;
    let defaults = FeatureConfig::default();
    let feature_config = FeatureConfig {
        num_bands: args.bands.unwrap_or(defaults.num_bands),
        frame_len: args.frame.unwrap_or(defaults.frame_len),
        hop: args.hop.unwrap_or(defaults.hop),
        sample_rate: args.sample_rate.unwrap_or(defaults.sample_rate),
    };
    let train_defaults = TrainConfig::default();
    let train_config = TrainConfig {
        learning_rate: args.learning_rate.unwrap_or(train_defaults.learning_rate),
        epochs: args.epochs.unwrap_or(train_defaults.epochs),
    };

    let manifest =
        read_manifest(resolve(root, &manifest_path)).or_input("reading the manifest")?;

    let results: Vec<Result<_, String>> = manifest
        .entries
        .par_iter()
        .map(|entry| load_features(entry, root, &feature_config))
        .collect();
    let mut features = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(fv) => features.push(fv),
            Err(message) => failures.push(message),
        }
    }
    if !failures.is_empty() {
        return Err(input_error(summarize_failures("clips", &failures)));
    }
    let labels: Vec<Label> = manifest.entries.iter().map(|e| e.label).collect();

    let outcome =
        train(&features, &labels, &feature_config, &train_config).or_input("training")?;
    let out_path = resolve(root, &out);
    ensure_parent(&out_path)?;
    outcome.model.save(&out_path).or_internal("saving the model")?;

    let spoof = labels.iter().filter(|&&l| l == Label::Spoof).count();
    println!(
        "trained on {} clips ({} spoof, {} bona fide): {} epochs, final loss {:.6}, model {}",
        labels.len(),
        spoof,
        labels.len() - spoof,
        outcome.epochs_run,
        outcome.final_loss,
        out_path.display(),
    );
    Ok(())
}
