//! Rank matrices, top-N accuracy curves and X-metrics.
//!
//! Ties are always resolved to the *maximum* position of the tie group, so a
//! predictor cannot gain accuracy by spreading uniform mass over many
//! categories: a fully uniform row puts every category at rank K.

use serde::{Deserialize, Serialize};

use crate::data::{CategoryId, LabelMap, PredictionMatrix};
use crate::error::{Error, Result};

/// Thresholds reported by default, in percent.
pub const DEFAULT_X_THRESHOLDS: [f64; 4] = [80.0, 90.0, 95.0, 99.0];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMatrix {
    sequence_ids: Vec<String>,
    category_ids: Vec<CategoryId>,
    ranks: Vec<u32>,
}

impl RankMatrix {
    pub fn num_sequences(&self) -> usize {
        self.sequence_ids.len()
    }

    pub fn num_categories(&self) -> usize {
        self.category_ids.len()
    }

    pub fn sequence_ids(&self) -> &[String] {
        &self.sequence_ids
    }

    pub fn category_ids(&self) -> &[CategoryId] {
        &self.category_ids
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let k = self.category_ids.len();
        &self.ranks[i * k..(i + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.ranks.chunks_exact(self.category_ids.len())
    }

    pub fn category_index(&self, id: &CategoryId) -> Option<usize> {
        self.category_ids.iter().position(|c| c == id)
    }

    /// Rank of the true category for every row, in row order.
    pub fn true_ranks(&self, labels: &LabelMap) -> Result<Vec<u32>> {
        let index: std::collections::HashMap<&CategoryId, usize> = self
            .category_ids
            .iter()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        self.sequence_ids
            .iter()
            .zip(self.rows())
            .map(|(id, row)| {
                let cat = labels.require(id)?;
                let col = index
                    .get(cat)
                    .ok_or_else(|| Error::UnknownCategory(cat.to_string()))?;
                Ok(row[*col])
            })
            .collect()
    }
}

/// Ranks one row of probabilities in place into `out`.
///
/// Categories are ordered by descending probability; each group of exactly
/// equal values spanning positions `p+1..=q` receives rank `q`.
pub fn rank_row(row: &[f64], out: &mut [u32]) {
    debug_assert_eq!(row.len(), out.len());
    let mut order: Vec<usize> = (0..row.len()).collect();
    // -0.0 and 0.0 compare equal under `==`; total_cmp would separate them.
    let key = |v: f64| if v == 0.0 { 0.0 } else { v };
    order.sort_by(|&a, &b| key(row[b]).total_cmp(&key(row[a])));
    let mut start = 0;
    while start < order.len() {
        let v = row[order[start]];
        let mut end = start + 1;
        while end < order.len() && row[order[end]] == v {
            end += 1;
        }
        for &col in &order[start..end] {
            out[col] = end as u32;
        }
        start = end;
    }
}

pub fn rank_matrix(p: &PredictionMatrix) -> RankMatrix {
    let k = p.num_categories();
    let mut ranks = vec![0u32; p.values().len()];
    for (row, out) in p.rows().zip(ranks.chunks_exact_mut(k)) {
        rank_row(row, out);
    }
    RankMatrix {
        sequence_ids: p.sequence_ids().to_vec(),
        category_ids: p.category_ids().to_vec(),
        ranks,
    }
}

/// Fraction of rows whose true category has rank `<= n`.
pub fn top_n_accuracy(r: &RankMatrix, labels: &LabelMap, n: usize) -> Result<f64> {
    if n == 0 || n > r.num_categories() {
        return Err(Error::InvalidArgument(format!(
            "n must be in [1, {}], got {n}",
            r.num_categories()
        )));
    }
    let ranks = r.true_ranks(labels)?;
    let hits = ranks.iter().filter(|&&rank| rank as usize <= n).count();
    Ok(hits as f64 / ranks.len() as f64)
}

/// Top-N accuracy for every N in `1..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCurve {
    /// `hits[N-1]` = number of rows with true rank `<= N`.
    hits: Vec<usize>,
    total: usize,
    values: Vec<f64>,
}

impl AccuracyCurve {
    /// Builds a curve from the true-category rank of each row.
    pub fn from_true_ranks(true_ranks: &[u32], num_categories: usize) -> Self {
        let mut histogram = vec![0usize; num_categories];
        for &rank in true_ranks {
            histogram[rank as usize - 1] += 1;
        }
        let mut running = 0;
        let hits: Vec<usize> = histogram
            .into_iter()
            .map(|c| {
                running += c;
                running
            })
            .collect();
        let total = true_ranks.len();
        let values = hits.iter().map(|&h| h as f64 / total as f64).collect();
        AccuracyCurve {
            hits,
            total,
            values,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn hits(&self) -> &[usize] {
        &self.hits
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Top-N accuracy, with N clamped to `[1, K]`.
    pub fn at(&self, n: usize) -> f64 {
        self.values[n.clamp(1, self.values.len()) - 1]
    }
}

/// Single histogram pass over the true ranks.
pub fn accuracy_curve(r: &RankMatrix, labels: &LabelMap) -> Result<AccuracyCurve> {
    let ranks = r.true_ranks(labels)?;
    Ok(AccuracyCurve::from_true_ranks(&ranks, r.num_categories()))
}

/// Smallest N with top-N accuracy at least `r_threshold` percent.
///
/// Always defined because the final curve value is 1.
///
/// # Panics
///
/// If `r_threshold` is outside `(0, 100]`.
pub fn x_metric(curve: &AccuracyCurve, r_threshold: f64) -> usize {
    assert!(
        r_threshold > 0.0 && r_threshold <= 100.0,
        "threshold must be in (0, 100], got {r_threshold}"
    );
    let target = r_threshold / 100.0;
    curve
        .values()
        .iter()
        .position(|&v| v >= target)
        .map(|i| i + 1)
        .unwrap_or(curve.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XMetricSet {
    pub thresholds: Vec<f64>,
    pub scores: Vec<usize>,
}

impl XMetricSet {
    pub fn get(&self, threshold: f64) -> Option<usize> {
        self.thresholds
            .iter()
            .position(|&t| t == threshold)
            .map(|i| self.scores[i])
    }
}

pub fn x_metrics(curve: &AccuracyCurve, thresholds: &[f64]) -> XMetricSet {
    XMetricSet {
        thresholds: thresholds.to_vec(),
        scores: thresholds.iter().map(|&t| x_metric(curve, t)).collect(),
    }
}

/// `1 - top-N accuracy` for every N.
pub fn misclassification_curve(curve: &AccuracyCurve) -> Vec<f64> {
    curve.values().iter().map(|v| 1.0 - v).collect()
}
