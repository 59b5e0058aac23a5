//! Evaluation report assembly and rendering.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::manifest::{Label, Manifest};
use crate::metrics::{
    accuracy_at_threshold, compute_eer, join_records, mean_std, quality_correlation,
    CorrelationReport, MeanStd, MetricsError, ScoreRecord, SetupQuality,
};

/// Metrics from one score file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// Where the scores came from, for the report reader.
    pub source: String,
    pub num_records: usize,
    pub accuracy: f64,
    pub eer: f64,
    pub eer_threshold: f64,
    /// Accuracy per attack group (architecture codes plus "bona fide").
    pub per_attack: BTreeMap<String, f64>,
    /// Spoof accuracy per setup uid.
    pub per_setup: BTreeMap<String, f64>,
}

/// Full evaluation output: per-trial metrics plus mean and spread across
/// trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub accuracy: MeanStd,
    pub eer: MeanStd,
    pub per_attack: BTreeMap<String, MeanStd>,
    pub per_setup: Vec<SetupQuality>,
    #[serde(default)]
    pub correlations: CorrelationReport,
    pub trials: Vec<TrialResult>,
}

/// Computes one trial's metrics: labels are joined from the manifest, then
/// overall accuracy, EER, per-attack accuracy, and per-setup spoof accuracy
/// are taken at the given threshold.
pub fn build_trial(
    records: &[ScoreRecord],
    manifest: &Manifest,
    threshold: f64,
    source: impl Into<String>,
) -> Result<TrialResult, MetricsError> {
    let joined = join_records(records, manifest)?;
    let labeled: Vec<ScoreRecord> = joined.iter().map(|(r, _)| r.clone()).collect();
    let accuracy = accuracy_at_threshold(&labeled, threshold)?;
    let eer = compute_eer(&labeled)?;

    let mut attack_counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut setup_counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (record, entry) in &joined {
        let correct = match entry.label {
            Label::Spoof => record.score > threshold,
            Label::BonaFide => record.score <= threshold,
        };
        let group = match (entry.label, entry.architecture) {
            (Label::BonaFide, _) => "bona fide".to_owned(),
            (Label::Spoof, Some(arch)) => arch.code().to_owned(),
            (Label::Spoof, None) => "spoof".to_owned(),
        };
        let slot = attack_counts.entry(group).or_default();
        slot.0 += 1;
        slot.1 += usize::from(correct);
        if entry.label == Label::Spoof {
            let slot = setup_counts.entry(entry.uid.clone()).or_default();
            slot.0 += 1;
            slot.1 += usize::from(correct);
        }
    }
    let ratio = |(n, c): (usize, usize)| c as f64 / n as f64;
    Ok(TrialResult {
        source: source.into(),
        num_records: records.len(),
        accuracy,
        eer: eer.eer,
        eer_threshold: eer.threshold,
        per_attack: attack_counts
            .into_iter()
            .map(|(k, v)| (k, ratio(v)))
            .collect(),
        per_setup: setup_counts
            .into_iter()
            .map(|(k, v)| (k, ratio(v)))
            .collect(),
    })
}

/// Aggregates trials into a report: mean and population spread for overall
/// and per-attack metrics, and mean per-setup spoof accuracy rows ready for
/// quality joining.
pub fn assemble_report(trials: Vec<TrialResult>, threshold: f64) -> EvalReport {
    let collect = |f: &dyn Fn(&TrialResult) -> f64| -> Vec<f64> {
        trials.iter().map(f).collect()
    };
    let accuracy = mean_std(&collect(&|t| t.accuracy));
    let eer = mean_std(&collect(&|t| t.eer));

    let mut attack_values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for trial in &trials {
        for (group, &v) in &trial.per_attack {
            attack_values.entry(group.clone()).or_default().push(v);
        }
    }
    let per_attack = attack_values
        .into_iter()
        .map(|(group, vs)| (group, mean_std(&vs)))
        .collect();

    let mut setup_values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for trial in &trials {
        for (uid, &v) in &trial.per_setup {
            setup_values.entry(uid.clone()).or_default().push(v);
        }
    }
    let per_setup = setup_values
        .into_iter()
        .map(|(uid, vs)| SetupQuality {
            uid,
            spoof_accuracy: vs.iter().sum::<f64>() / vs.len() as f64,
            mos: None,
            pesq: None,
        })
        .collect();

    EvalReport {
        threshold,
        accuracy,
        eer,
        per_attack,
        per_setup,
        correlations: CorrelationReport::default(),
        trials,
    }
}

/// Fills in per-setup quality columns and recomputes the correlation block.
pub fn attach_quality(
    report: &mut EvalReport,
    mos: &BTreeMap<String, f64>,
    pesq: &BTreeMap<String, f64>,
) {
    for row in &mut report.per_setup {
        if let Some(&v) = mos.get(&row.uid) {
            row.mos = Some(v);
        }
        if let Some(&v) = pesq.get(&row.uid) {
            row.pesq = Some(v);
        }
    }
    report.correlations = quality_correlation(&report.per_setup);
}

fn attack_display_name(code: &str) -> String {
    code.parse::<crate::manifest::Architecture>()
        .map(|a| a.display_name().to_owned())
        .unwrap_or_else(|_| code.to_owned())
}

/// Plain-text table: overall accuracy and EER with spread, then one row per
/// attack group.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let trials = report.trials.len();
    out.push_str(&format!(
        "trials: {trials}, decision threshold: {}\n",
        report.threshold
    ));
    out.push_str(&format!(
        "overall accuracy: {:5.1} ± {:.1} %\n",
        report.accuracy.mean * 100.0,
        report.accuracy.stddev * 100.0
    ));
    out.push_str(&format!(
        "overall EER:      {:5.1} ± {:.1} %\n",
        report.eer.mean * 100.0,
        report.eer.stddev * 100.0
    ));
    out.push('\n');
    out.push_str(&format!("{:<12} {:>10} {:>8}\n", "attack", "accuracy %", "± %"));
    for (group, value) in &report.per_attack {
        out.push_str(&format!(
            "{:<12} {:>10.1} {:>8.1}\n",
            attack_display_name(group),
            value.mean * 100.0,
            value.stddev * 100.0
        ));
    }
    if let Some(c) = report.correlations.accuracy_vs_mos {
        out.push_str(&format!(
            "\naccuracy ~ MOS:  r = {:+.3} over {} setups{}\n",
            c.r,
            c.num_pairs,
            if c.degenerate { " (two-point)" } else { "" }
        ));
    }
    if let Some(c) = report.correlations.accuracy_vs_pesq {
        out.push_str(&format!(
            "accuracy ~ PESQ: r = {:+.3} over {} setups{}\n",
            c.r,
            c.num_pairs,
            if c.degenerate { " (two-point)" } else { "" }
        ));
    }
    out
}

/// Long-form scatter data: one row per (setup, quality metric) pair.
pub fn scatter_csv(rows: &[SetupQuality]) -> String {
    let mut out = String::from("uid,metric,quality,accuracy\n");
    for row in rows {
        if let Some(mos) = row.mos {
            out.push_str(&format!("{},mos,{},{}\n", row.uid, mos, row.spoof_accuracy));
        }
        if let Some(pesq) = row.pesq {
            out.push_str(&format!(
                "{},pesq,{},{}\n",
                row.uid, pesq, row.spoof_accuracy
            ));
        }
    }
    out
}

struct Panel {
    title: &'static str,
    points: Vec<(f64, f64)>,
    color: &'static str,
}

/// Self-contained SVG scatter: one panel per available quality metric,
/// spoof accuracy on the y axis.
pub fn scatter_svg(rows: &[SetupQuality]) -> String {
    let panels: Vec<Panel> = [
        (
            "MOS",
            rows.iter()
                .filter_map(|r| r.mos.map(|m| (m, r.spoof_accuracy)))
                .collect::<Vec<_>>(),
            "#d62728",
        ),
        (
            "PESQ",
            rows.iter()
                .filter_map(|r| r.pesq.map(|p| (p, r.spoof_accuracy)))
                .collect::<Vec<_>>(),
            "#1f77b4",
        ),
    ]
    .into_iter()
    .filter(|(_, pts, _)| !pts.is_empty())
    .map(|(title, points, color)| Panel {
        title,
        points,
        color,
    })
    .collect();

    let panel_w = 300.0;
    let panel_h = 260.0;
    let margin = 45.0;
    let width = margin + panels.len().max(1) as f64 * (panel_w + margin);
    let height = panel_h + 2.0 * margin;
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    svg.push_str(&format!(
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    ));
    if panels.is_empty() {
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif">no quality data</text>"#,
            width / 2.0,
            height / 2.0
        ));
    }
    for (i, panel) in panels.iter().enumerate() {
        let x0 = margin + i as f64 * (panel_w + margin);
        let y0 = margin;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(q, _) in &panel.points {
            lo = lo.min(q);
            hi = hi.max(q);
        }
        if hi - lo < 1e-9 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = (hi - lo) * 0.05;
        let (lo, hi) = (lo - pad, hi + pad);
        let sx = |q: f64| x0 + (q - lo) / (hi - lo) * panel_w;
        let sy = |a: f64| y0 + (1.0 - a) * panel_h;
        svg.push_str(&format!(
            r##"<rect x="{x0}" y="{y0}" width="{panel_w}" height="{panel_h}" fill="none" stroke="#444"/>"##
        ));
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
            x0 + panel_w / 2.0,
            y0 - 10.0,
            panel.title
        ));
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">spoof accuracy</text>"#,
            x0 - 30.0,
            y0 + panel_h / 2.0
        ));
        for tick in [0.0f64, 0.5, 1.0] {
            svg.push_str(&format!(
                r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="10">{tick:.1}</text>"#,
                x0 - 4.0,
                sy(tick) + 3.0
            ));
        }
        for tick in [lo + pad, hi - pad] {
            svg.push_str(&format!(
                r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="10">{tick:.2}</text>"#,
                sx(tick),
                y0 + panel_h + 14.0
            ));
        }
        for &(q, a) in &panel.points {
            svg.push_str(&format!(
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{}" fill-opacity="0.75"/>"#,
                sx(q),
                sy(a.clamp(0.0, 1.0)),
                panel.color
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}
