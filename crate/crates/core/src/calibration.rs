//! Expected and maximum calibration error over equal-width confidence bins.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{csv_write_error, LabelMap, PredictionMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    /// 1-based bin index; the bin covers `((bin-1)/M, bin/M]`.
    pub bin: usize,
    pub count: usize,
    /// `None` for an empty bin.
    pub accuracy: Option<f64>,
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub bins: Vec<CalibrationBin>,
    pub samples: usize,
    pub ece: f64,
    pub mce: f64,
}

/// 1-based bin for confidence `p` among `m` bins of `((b-1)/m, b/m]`.
///
/// `p <= 0` lands in bin 1 and `p > 1` in bin `m`. The candidate from
/// `ceil(p*m)` is nudged so that membership agrees with the interval bounds
/// as computed in floating point.
pub fn bin_index(p: f64, m: usize) -> usize {
    if !(p > 0.0) {
        return 1;
    }
    let mf = m as f64;
    let mut b = ((p * mf).ceil() as usize).clamp(1, m);
    while b > 1 && p <= (b - 1) as f64 / mf {
        b -= 1;
    }
    while b < m && p > b as f64 / mf {
        b += 1;
    }
    b
}

/// Top-1 confidence and correctness for each row: the first column holding
/// the row maximum is the prediction.
pub fn top1_samples(p: &PredictionMatrix, labels: &LabelMap) -> Result<Vec<(f64, bool)>> {
    p.sequence_ids()
        .iter()
        .zip(p.rows())
        .map(|(id, row)| {
            let truth = labels.require(id)?;
            let truth_col = p
                .category_index(truth)
                .ok_or_else(|| Error::UnknownCategory(truth.to_string()))?;
            let (best, conf) =
                row.iter().enumerate().fold(
                    (0, row[0]),
                    |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
                );
            Ok((conf, best == truth_col))
        })
        .collect()
}

/// Bins `(confidence, correct)` samples into `m` bins and computes ECE/MCE.
///
/// Empty bins carry zero weight in ECE and are skipped for MCE.
pub fn calibrate(samples: &[(f64, bool)], m: usize) -> Result<CalibrationTable> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "bin count must be at least 1".into(),
        ));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument(
            "calibration needs at least one sample".into(),
        ));
    }
    let mut count = vec![0usize; m];
    let mut correct = vec![0usize; m];
    let mut conf_sum = vec![0.0f64; m];
    for &(p, ok) in samples {
        let b = bin_index(p, m) - 1;
        count[b] += 1;
        correct[b] += ok as usize;
        conf_sum[b] += p;
    }
    let n = samples.len() as f64;
    let mut ece = 0.0;
    let mut mce = 0.0f64;
    let bins = (0..m)
        .map(|b| {
            if count[b] == 0 {
                return CalibrationBin {
                    bin: b + 1,
                    count: 0,
                    accuracy: None,
                    confidence: None,
                };
            }
            let size = count[b] as f64;
            let acc = correct[b] as f64 / size;
            let conf = conf_sum[b] / size;
            let gap = (acc - conf).abs();
            ece += size / n * gap;
            mce = mce.max(gap);
            CalibrationBin {
                bin: b + 1,
                count: count[b],
                accuracy: Some(acc),
                confidence: Some(conf),
            }
        })
        .collect();
    Ok(CalibrationTable {
        bins,
        samples: samples.len(),
        ece,
        mce,
    })
}

pub fn calibration_table(
    p: &PredictionMatrix,
    labels: &LabelMap,
    m: usize,
) -> Result<CalibrationTable> {
    calibrate(&top1_samples(p, labels)?, m)
}

pub fn ece(p: &PredictionMatrix, labels: &LabelMap, m: usize) -> Result<f64> {
    calibration_table(p, labels, m).map(|t| t.ece)
}

pub fn mce(p: &PredictionMatrix, labels: &LabelMap, m: usize) -> Result<f64> {
    calibration_table(p, labels, m).map(|t| t.mce)
}

impl CalibrationTable {
    /// `bin,count,accuracy,confidence`; empty bins leave the last two blank.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["bin", "count", "accuracy", "confidence"])
            .map_err(csv_write_error)?;
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for b in &self.bins {
            wtr.write_record([
                b.bin.to_string(),
                b.count.to_string(),
                fmt(b.accuracy),
                fmt(b.confidence),
            ])
            .map_err(csv_write_error)?;
        }
        wtr.flush().map_err(|e| Error::io("<writer>", e))?;
        Ok(())
    }
}
