//! Rank-1 confusion counts and macro-averaged precision, recall and F1.

use serde::{Deserialize, Serialize};

use crate::data::{CategoryId, LabelMap};
use crate::error::Result;
use crate::rank::RankMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub category_id: CategoryId,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub categories: Vec<CategoryCount>,
    pub rows: usize,
}

/// Counts positives at rank 1.
///
/// A category is "predicted" for a row only if it holds rank exactly 1. When
/// the top of a row is a tie, every tied category gets the group's maximum
/// rank (> 1), so that row predicts nothing: it adds one false negative to its
/// true category and no positives anywhere.
pub fn category_counts(r: &RankMatrix, labels: &LabelMap) -> Result<CategoryCounts> {
    let k = r.num_categories();
    let mut tp = vec![0usize; k];
    let mut fp = vec![0usize; k];
    let mut fn_ = vec![0usize; k];
    let mut support = vec![0usize; k];
    let true_ranks = r.true_ranks(labels)?;
    for ((id, row), &true_rank) in r.sequence_ids().iter().zip(r.rows()).zip(&true_ranks) {
        // true_ranks succeeded, so both lookups are present
        let truth = r
            .category_index(labels.require(id)?)
            .expect("label category validated by true_ranks");
        support[truth] += 1;
        if true_rank == 1 {
            tp[truth] += 1;
        } else {
            fn_[truth] += 1;
        }
        for (c, &rank) in row.iter().enumerate() {
            if rank == 1 && c != truth {
                fp[c] += 1;
            }
        }
    }
    let categories = r
        .category_ids()
        .iter()
        .enumerate()
        .map(|(c, id)| CategoryCount {
            category_id: id.clone(),
            tp: tp[c],
            fp: fp[c],
            fn_: fn_[c],
            support: support[c],
        })
        .collect();
    Ok(CategoryCounts {
        categories,
        rows: true_ranks.len(),
    })
}

/// How to treat a 0/0 precision or recall.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroDivision {
    /// Undefined ratios are 0 and the category stays in the macro average.
    #[default]
    Zero,
    /// Categories with an undefined ratio are left out of that macro average.
    Exclude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub category_id: CategoryId,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfReport {
    pub categories: Vec<CategoryScore>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn harmonic(p: Option<f64>, r: Option<f64>) -> Option<f64> {
    match (p, r) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Per-category and macro-averaged precision, recall and F1.
///
/// Under [`ZeroDivision::Zero`] every score is `Some`; under
/// [`ZeroDivision::Exclude`] undefined ratios stay `None` and are skipped by
/// the macro means.
pub fn precision_recall_f1(counts: &CategoryCounts, policy: ZeroDivision) -> PrfReport {
    let categories: Vec<CategoryScore> = counts
        .categories
        .iter()
        .map(|c| {
            let mut precision = ratio(c.tp, c.tp + c.fp);
            let mut recall = ratio(c.tp, c.tp + c.fn_);
            if policy == ZeroDivision::Zero {
                precision = precision.or(Some(0.0));
                recall = recall.or(Some(0.0));
            }
            CategoryScore {
                category_id: c.category_id.clone(),
                precision,
                recall,
                f1: harmonic(precision, recall),
            }
        })
        .collect();
    PrfReport {
        macro_precision: mean(categories.iter().filter_map(|c| c.precision)),
        macro_recall: mean(categories.iter().filter_map(|c| c.recall)),
        macro_f1: mean(categories.iter().filter_map(|c| c.f1)),
        categories,
    }
}
