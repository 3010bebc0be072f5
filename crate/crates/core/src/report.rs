//! Per-predictor metric reports, leaderboards and plot series.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{category_analysis, CategoryAnalysis};
use crate::calibration::{calibration_table, CalibrationTable, DEFAULT_BINS};
use crate::classification::{category_counts, precision_recall_f1, ZeroDivision};
use crate::data::{csv_write_error, open, CategoryId, LabelMap, PredictionMatrix};
use crate::error::{Error, Result};
use crate::rank::{accuracy_curve, rank_matrix, x_metrics, XMetricSet, DEFAULT_X_THRESHOLDS};

pub const DEFAULT_TOP_N: [usize; 4] = [1, 5, 10, 20];

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub name: String,
    pub bins: usize,
    pub top_n: Vec<usize>,
    pub x_thresholds: Vec<f64>,
    pub zero_division: ZeroDivision,
    pub target: Option<CategoryId>,
}

impl ReportOptions {
    pub fn new(name: impl Into<String>) -> Self {
        ReportOptions {
            name: name.into(),
            bins: DEFAULT_BINS,
            top_n: DEFAULT_TOP_N.to_vec(),
            x_thresholds: DEFAULT_X_THRESHOLDS.to_vec(),
            zero_division: ZeroDivision::Zero,
            target: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub predictions_sha256: String,
    pub labels_sha256: String,
    pub tool_version: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn from_bytes(predictions: &[u8], labels: &[u8], seed: Option<u64>) -> Self {
        Provenance {
            predictions_sha256: sha256_hex(predictions),
            labels_sha256: sha256_hex(labels),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
        }
    }

    pub fn from_files(predictions: &Path, labels: &Path, seed: Option<u64>) -> Result<Self> {
        Ok(Provenance {
            predictions_sha256: sha256_file(predictions)?,
            labels_sha256: sha256_file(labels)?,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut reader = open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopN {
    pub n: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub name: String,
    pub sequences: usize,
    pub categories: usize,
    pub top_n: Vec<TopN>,
    pub x_metrics: XMetricSet,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub ece: f64,
    pub mce: f64,
    pub calibration: CalibrationTable,
    pub accuracy_curve: Vec<f64>,
    pub category_analysis: Option<CategoryAnalysis>,
    pub provenance: Provenance,
}

impl MetricReport {
    /// Top-N accuracy for a reported N.
    pub fn top(&self, n: usize) -> Option<f64> {
        self.top_n.iter().find(|t| t.n == n).map(|t| t.accuracy)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(open(path.as_ref())?)?)
    }

    /// Summary line as CSV: the scalar fields only.
    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["name".to_string(), "sequences".into(), "categories".into()];
        let mut row = vec![
            self.name.clone(),
            self.sequences.to_string(),
            self.categories.to_string(),
        ];
        for t in &self.top_n {
            header.push(format!("top{}", t.n));
            row.push(t.accuracy.to_string());
        }
        for (t, s) in self.x_metrics.thresholds.iter().zip(&self.x_metrics.scores) {
            header.push(format!("x{t}"));
            row.push(s.to_string());
        }
        for (h, v) in [
            ("macro_precision", self.macro_precision),
            ("macro_recall", self.macro_recall),
            ("macro_f1", self.macro_f1),
            ("ece", self.ece),
            ("mce", self.mce),
        ] {
            header.push(h.into());
            row.push(v.to_string());
        }
        wtr.write_record(&header).map_err(csv_write_error)?;
        wtr.write_record(&row).map_err(csv_write_error)?;
        wtr.flush().map_err(|e| Error::io("<writer>", e))?;
        Ok(())
    }
}

/// Computes every metric for one predictor. Inputs are assumed validated.
pub fn build_report(
    p: &PredictionMatrix,
    labels: &LabelMap,
    options: &ReportOptions,
    provenance: Provenance,
) -> Result<MetricReport> {
    let ranks = rank_matrix(p);
    let curve = accuracy_curve(&ranks, labels)?;
    let prf = precision_recall_f1(&category_counts(&ranks, labels)?, options.zero_division);
    let calibration = calibration_table(p, labels, options.bins)?;
    let category_analysis = options
        .target
        .as_ref()
        .map(|t| category_analysis(p, labels, t))
        .transpose()?;
    Ok(MetricReport {
        name: options.name.clone(),
        sequences: p.num_sequences(),
        categories: p.num_categories(),
        top_n: options
            .top_n
            .iter()
            .map(|&n| TopN {
                n,
                accuracy: curve.at(n),
            })
            .collect(),
        x_metrics: x_metrics(&curve, &options.x_thresholds),
        macro_precision: prf.macro_precision,
        macro_recall: prf.macro_recall,
        macro_f1: prf.macro_f1,
        ece: calibration.ece,
        mce: calibration.mce,
        calibration,
        accuracy_curve: curve.values().to_vec(),
        category_analysis,
        provenance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub position: usize,
    pub name: String,
    pub top1: f64,
    pub top10: f64,
    pub x99: usize,
    pub macro_f1: f64,
    pub ece: f64,
}

/// Sorted by top-10 accuracy descending, then X99 ascending, then name.
pub fn leaderboard(reports: &[MetricReport]) -> Vec<LeaderboardRow> {
    let curve_at = |r: &MetricReport, n: usize| {
        r.accuracy_curve
            .get(n.clamp(1, r.accuracy_curve.len()) - 1)
            .copied()
            .unwrap_or(0.0)
    };
    let x99 = |r: &MetricReport| {
        r.x_metrics.get(99.0).unwrap_or_else(|| {
            r.accuracy_curve
                .iter()
                .position(|&v| v >= 0.99)
                .map_or(r.categories, |i| i + 1)
        })
    };
    let mut rows: Vec<LeaderboardRow> = reports
        .iter()
        .map(|r| LeaderboardRow {
            position: 0,
            name: r.name.clone(),
            top1: curve_at(r, 1),
            top10: curve_at(r, 10),
            x99: x99(r),
            macro_f1: r.macro_f1,
            ece: r.ece,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.top10
            .total_cmp(&a.top10)
            .then(a.x99.cmp(&b.x99))
            .then_with(|| a.name.cmp(&b.name))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.position = i + 1;
    }
    rows
}

pub fn write_leaderboard_csv<W: Write>(rows: &[LeaderboardRow], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in rows {
        wtr.serialize(r).map_err(csv_write_error)?;
    }
    wtr.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

/// Fixed-width text table for terminals.
pub fn format_leaderboard(rows: &[LeaderboardRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4}  {:<width$}  {:>8}  {:>8}  {:>6}  {:>8}  {:>8}",
        "#", "name", "top1", "top10", "X99", "macro_f1", "ece"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>4}  {:<width$}  {:>8.4}  {:>8.4}  {:>6}  {:>8.4}  {:>8.4}",
            r.position, r.name, r.top1, r.top10, r.x99, r.macro_f1, r.ece
        );
    }
    out
}

/// `n,accuracy,misclassification`, one row per N in `1..=K`.
pub fn write_accuracy_curve_csv<W: Write>(report: &MetricReport, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["n", "accuracy", "misclassification"])
        .map_err(csv_write_error)?;
    for (i, acc) in report.accuracy_curve.iter().enumerate() {
        wtr.write_record([
            (i + 1).to_string(),
            acc.to_string(),
            (1.0 - acc).to_string(),
        ])
        .map_err(csv_write_error)?;
    }
    wtr.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

const SVG_W: f64 = 480.0;
const SVG_H: f64 = 320.0;
const MARGIN: f64 = 40.0;

fn svg_frame(title: &str, x_label: &str, y_label: &str, body: &str) -> String {
    let (pw, ph) = (SVG_W - 2.0 * MARGIN, SVG_H - 2.0 * MARGIN);
    format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">
<rect x="{m}" y="{m}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>
<text x="{cx}" y="20" text-anchor="middle" font-family="sans-serif" font-size="13">{title}</text>
<text x="{cx}" y="{xl}" text-anchor="middle" font-family="sans-serif" font-size="11">{x_label}</text>
<text x="12" y="{cy}" text-anchor="middle" font-family="sans-serif" font-size="11" transform="rotate(-90 12 {cy})">{y_label}</text>
{body}</svg>
"##,
        w = SVG_W,
        h = SVG_H,
        m = MARGIN,
        cx = SVG_W / 2.0,
        cy = SVG_H / 2.0,
        xl = SVG_H - 8.0,
    )
}

fn to_px(x: f64, y: f64) -> (f64, f64) {
    let (pw, ph) = (SVG_W - 2.0 * MARGIN, SVG_H - 2.0 * MARGIN);
    (MARGIN + x * pw, SVG_H - MARGIN - y * ph)
}

/// Misclassification rate against log10(N).
pub fn accuracy_curve_svg(report: &MetricReport) -> String {
    let k = report.accuracy_curve.len().max(2) as f64;
    let points: Vec<String> = misclassification_curve_values(&report.accuracy_curve)
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let (x, y) = to_px(((i + 1) as f64).log10() / k.log10(), *m);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let body = format!(
        "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        points.join(" ")
    );
    svg_frame(
        &format!("{}: misclassification vs N", report.name),
        "N (log scale)",
        "1 - top-N accuracy",
        &body,
    )
}

fn misclassification_curve_values(curve: &[f64]) -> Vec<f64> {
    curve.iter().map(|v| 1.0 - v).collect()
}

/// Reliability diagram: per-bin accuracy bars with the diagonal.
pub fn reliability_svg(name: &str, table: &CalibrationTable) -> String {
    let m = table.bins.len() as f64;
    let mut body = String::new();
    let (x0, y0) = to_px(0.0, 0.0);
    let (x1, y1) = to_px(1.0, 1.0);
    let _ = writeln!(
        body,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y1}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>"
    );
    for b in &table.bins {
        if let Some(acc) = b.accuracy {
            let (left, top) = to_px((b.bin - 1) as f64 / m, acc);
            let (right, bottom) = to_px(b.bin as f64 / m, 0.0);
            let _ = writeln!(
                body,
                "<rect x=\"{left:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#1f77b4\" fill-opacity=\"0.7\" stroke=\"#fff\"/>",
                right - left,
                bottom - top
            );
        }
    }
    svg_frame(
        &format!(
            "{name}: reliability (ECE {:.3}, MCE {:.3})",
            table.ece, table.mce
        ),
        "confidence",
        "accuracy",
        &body,
    )
}
