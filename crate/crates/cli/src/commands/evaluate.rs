//! `evaluate`: join score CSVs against a manifest and report accuracy, EER,
//! and per-attack breakdowns; repeated --scores files are independent trials
//! aggregated as mean and spread.

use std::path::Path;

use airgap_core::manifest::read_manifest;
use airgap_core::metrics::read_scores;
use airgap_core::report::{assemble_report, build_trial, render_table};
use clap::Args;
use serde::Deserialize;

use crate::config::Merge;
use crate::util::{ensure_parent, input_error, require, resolve, FailCtx, Failure};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct EvaluateArgs {
    /// Manifest with the ground-truth labels.
    #[arg(long)]
    pub manifest: Option<String>,
    /// Score CSV (file_id,score[,label]); repeat for multiple trials.
    #[arg(long)]
    pub scores: Vec<String>,
    /// Decision threshold: above is called spoof [default: 0.5].
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Output report path (JSON).
    #[arg(long)]
    pub out: Option<String>,
}

impl Merge for EvaluateArgs {
    fn or(self, fallback: Self) -> Self {
        Self {
            manifest: self.manifest.or(fallback.manifest),
            scores: if self.scores.is_empty() {
                fallback.scores
            } else {
                self.scores
            },
            threshold: self.threshold.or(fallback.threshold),
            out: self.out.or(fallback.out),
        }
    }
}

pub fn run(args: EvaluateArgs, root: &Path) -> Result<(), Failure> {
    let manifest_path = require(args.manifest, "manifest")?;
    let out = require(args.out, "out")?;
    if args.scores.is_empty() {
        return Err(input_error(
            "missing --scores: pass at least one score CSV",
        ));
    }
    let threshold = args.threshold.unwrap_or(DEFAULT_THRESHOLD);
    if !threshold.is_finite() {
        return Err(input_error(format!("bad --threshold {threshold}")));
    }

    let manifest =
        read_manifest(resolve(root, &manifest_path)).or_input("reading the manifest")?;
    let mut trials = Vec::with_capacity(args.scores.len());
    for source in &args.scores {
        let records = read_scores(resolve(root, source))
            .or_input(&format!("reading scores from {source}"))?;
        let trial = build_trial(&records, &manifest, threshold, source.clone())
            .or_input(&format!("evaluating {source}"))?;
        trials.push(trial);
    }
    let report = assemble_report(trials, threshold);

    let out_path = resolve(root, &out);
    ensure_parent(&out_path)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&out_path, text).or_internal("writing the report")?;

    print!("{}", render_table(&report));
    println!("report: {}", out_path.display());
    Ok(())
}
