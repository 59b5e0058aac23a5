//! `score-baseline`: score manifest audio with a trained model, emitting a
//! CSV that `evaluate` accepts directly.

use std::path::Path;

use airgap_core::detector::{score, DetectorModel};
use airgap_core::manifest::read_manifest;
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
pub struct ScoreBaselineArgs {
    /// Manifest to score; recorded takes are used when present.
    #[arg(long)]
    pub manifest: Option<String>,
    /// Trained model path (JSON).
    #[arg(long)]
    pub model: Option<String>,
    /// Output scores path (CSV: file_id,score,label).
    #[arg(long)]
    pub out: Option<String>,
}

impl Merge for ScoreBaselineArgs {
    fn or(self, fallback: Self) -> Self {
        Self {
            manifest: self.manifest.or(fallback.manifest),
            model: self.model.or(fallback.model),
            out: self.out.or(fallback.out),
        }
    }
}

pub fn run(args: ScoreBaselineArgs, root: &Path) -> Result<(), Failure> {
    let manifest_path = require(args.manifest, "manifest")?;
    let model_path = require(args.model, "model")?;
    let out = require(args.out, "out")?;

    let manifest =
        read_manifest(resolve(root, &manifest_path)).or_input("reading the manifest")?;
    let model =
        DetectorModel::<f64>::load(resolve(root, &model_path)).or_input("loading the model")?;

    let results: Vec<Result<f64, String>> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let features = load_features(entry, root, &model.feature_config)?;
            score(&model, &features).map_err(|e| format!("{}: {e}", entry.file_id()))
        })
        .collect();

    let mut scores = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(s) => scores.push(s),
            Err(message) => failures.push(message),
        }
    }
    if !failures.is_empty() {
        return Err(input_error(summarize_failures("clips", &failures)));
    }

    let out_path = resolve(root, &out);
    ensure_parent(&out_path)?;
    let mut writer = csv::Writer::from_path(&out_path).or_internal("opening the scores CSV")?;
    writer
        .write_record(["file_id", "score", "label"])
        .or_internal("writing the scores CSV")?;
    for (entry, s) in manifest.entries.iter().zip(&scores) {
        writer
            .write_record([entry.file_id(), &s.to_string(), entry.label.code()])
            .or_internal("writing the scores CSV")?;
    }
    writer.flush().or_internal("writing the scores CSV")?;

    println!("scored {} clips, scores {}", scores.len(), out_path.display());
    Ok(())
}
