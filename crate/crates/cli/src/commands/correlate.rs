//! `correlate`: join per-setup quality tables (MOS and PESQ) into an
//! existing evaluation report and emit correlations plus scatter outputs.

use std::collections::BTreeMap;
use std::path::Path;

use airgap_core::metrics::{mos_from_listener_csv, read_quality_csv, Correlation};
use airgap_core::report::{attach_quality, scatter_csv, scatter_svg, EvalReport};
use clap::Args;
use serde::Deserialize;

use crate::config::Merge;
use crate::util::{ensure_parent, input_error, require, resolve, FailCtx, Failure};

pub const MOS_RANGE: (f64, f64) = (1.0, 5.0);
pub const PESQ_RANGE: (f64, f64) = (-0.5, 4.5);
const DEFAULT_MIN_LISTENERS: usize = 3;

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct CorrelateArgs {
    /// Evaluation report JSON produced by `evaluate`.
    #[arg(long)]
    pub report: Option<String>,
    /// Per-setup MOS CSV (uid,mos); conflicts with --mos-raw.
    #[arg(long)]
    pub mos: Option<String>,
    /// Raw listener ratings CSV (uid,rating), averaged into MOS.
    #[arg(long)]
    pub mos_raw: Option<String>,
    /// Warn when a setup has fewer raw ratings than this [default: 3].
    #[arg(long)]
    pub min_listeners: Option<usize>,
    /// Per-setup PESQ CSV (uid,pesq).
    #[arg(long)]
    pub pesq: Option<String>,
    /// Updated report path (JSON).
    #[arg(long)]
    pub out: Option<String>,
    /// Optional long-form scatter data path (CSV).
    #[arg(long)]
    pub scatter_csv: Option<String>,
    /// Optional scatter plot path (SVG).
    #[arg(long)]
    pub svg: Option<String>,
}

impl Merge for CorrelateArgs {
    fn or(self, fallback: Self) -> Self {
        Self {
            report: self.report.or(fallback.report),
            mos: self.mos.or(fallback.mos),
            mos_raw: self.mos_raw.or(fallback.mos_raw),
            min_listeners: self.min_listeners.or(fallback.min_listeners),
            pesq: self.pesq.or(fallback.pesq),
            out: self.out.or(fallback.out),
            scatter_csv: self.scatter_csv.or(fallback.scatter_csv),
            svg: self.svg.or(fallback.svg),
        }
    }
}

fn describe(name: &str, correlation: Option<Correlation>, provided: bool) -> String {
    match correlation {
        Some(c) => format!(
            "accuracy ~ {name}: r = {:+.3} over {} setups{}",
            c.r,
            c.num_pairs,
            if c.degenerate { " (two-point)" } else { "" }
        ),
        None if provided => {
            format!("accuracy ~ {name}: not enough complete pairs to correlate")
        }
        None => format!("accuracy ~ {name}: no data"),
    }
}

pub fn run(args: CorrelateArgs, root: &Path) -> Result<(), Failure> {
    let report_path = require(args.report, "report")?;
    let out = require(args.out, "out")?;
    if args.mos.is_some() && args.mos_raw.is_some() {
        return Err(input_error("--mos and --mos-raw conflict, pass one"));
    }

    let text = std::fs::read_to_string(resolve(root, &report_path))
        .or_input(&format!("reading report {report_path}"))?;
    let mut report: EvalReport =
        serde_json::from_str(&text).or_input(&format!("parsing report {report_path}"))?;

    let mos: BTreeMap<String, f64> = if let Some(path) = &args.mos {
        read_quality_csv(resolve(root, path), "mos", MOS_RANGE)
            .or_input(&format!("reading MOS from {path}"))?
    } else if let Some(path) = &args.mos_raw {
        let (means, warnings) = mos_from_listener_csv(
            resolve(root, path),
            MOS_RANGE,
            args.min_listeners.unwrap_or(DEFAULT_MIN_LISTENERS),
        )
        .or_input(&format!("reading listener ratings from {path}"))?;
        for warning in warnings {
            log::warn!("{warning}");
        }
        means
    } else {
        BTreeMap::new()
    };
    let pesq: BTreeMap<String, f64> = match &args.pesq {
        Some(path) => read_quality_csv(resolve(root, path), "pesq", PESQ_RANGE)
            .or_input(&format!("reading PESQ from {path}"))?,
        None => BTreeMap::new(),
    };

    attach_quality(&mut report, &mos, &pesq);

    let mos_provided = args.mos.is_some() || args.mos_raw.is_some();
    if mos_provided && report.correlations.accuracy_vs_mos.is_none() {
        log::warn!("fewer than two setups have both accuracy and MOS");
    }
    if args.pesq.is_some() && report.correlations.accuracy_vs_pesq.is_none() {
        log::warn!("fewer than two setups have both accuracy and PESQ");
    }

    let out_path = resolve(root, &out);
    ensure_parent(&out_path)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&out_path, text).or_internal("writing the report")?;
    if let Some(path) = &args.scatter_csv {
        std::fs::write(resolve(root, path), scatter_csv(&report.per_setup))
            .or_internal("writing the scatter CSV")?;
    }
    if let Some(path) = &args.svg {
        std::fs::write(resolve(root, path), scatter_svg(&report.per_setup))
            .or_internal("writing the scatter SVG")?;
    }

    println!(
        "{}",
        describe("MOS", report.correlations.accuracy_vs_mos, mos_provided)
    );
    println!(
        "{}",
        describe("PESQ", report.correlations.accuracy_vs_pesq, args.pesq.is_some())
    );
    println!("report: {}", out_path.display());
    Ok(())
}
