//! How a predictor treats one distinguished category (typically the pooled
//! small-lab bucket).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{csv_write_error, CategoryId, LabelMap, PredictionMatrix};
use crate::error::{Error, Result};
use crate::rank::rank_matrix;
use crate::stats::geometric_mean;

/// Top-1 and top-10 accuracy on a subset of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetAccuracy {
    pub rows: usize,
    pub hits_top1: usize,
    pub hits_top10: usize,
    pub top1: Option<f64>,
    pub top10: Option<f64>,
}

impl SubsetAccuracy {
    fn new(rows: usize, hits_top1: usize, hits_top10: usize) -> Self {
        let frac = |h: usize| (rows > 0).then(|| h as f64 / rows as f64);
        SubsetAccuracy {
            rows,
            hits_top1,
            hits_top10,
            top1: frac(hits_top1),
            top10: frac(hits_top10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAnalysis {
    pub target: CategoryId,
    /// Share of rows whose true label is the target.
    pub true_frequency: f64,
    /// Share of rows ranking the target at 10 or better.
    pub top10_inclusion_rate: f64,
    pub geometric_mean_rank: f64,
    pub accuracy_all: SubsetAccuracy,
    /// Rows whose true label is not the target.
    pub accuracy_known_only: SubsetAccuracy,
    /// Rows whose true label is the target.
    pub accuracy_target_only: SubsetAccuracy,
}

impl CategoryAnalysis {
    /// `subset,rows,hits_top1,hits_top10,top1,top10` for the three subsets.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["subset", "rows", "hits_top1", "hits_top10", "top1", "top10"])
            .map_err(csv_write_error)?;
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (name, s) in [
            ("all", &self.accuracy_all),
            ("known_only", &self.accuracy_known_only),
            ("target_only", &self.accuracy_target_only),
        ] {
            wtr.write_record([
                name.to_string(),
                s.rows.to_string(),
                s.hits_top1.to_string(),
                s.hits_top10.to_string(),
                fmt(s.top1),
                fmt(s.top10),
            ])
            .map_err(csv_write_error)?;
        }
        wtr.flush().map_err(|e| Error::io("<writer>", e))?;
        Ok(())
    }
}

pub fn category_analysis(
    p: &PredictionMatrix,
    labels: &LabelMap,
    target: &CategoryId,
) -> Result<CategoryAnalysis> {
    let target_col = p
        .category_index(target)
        .ok_or_else(|| Error::UnknownCategory(target.to_string()))?;
    let ranks = rank_matrix(p);
    let true_ranks = ranks.true_ranks(labels)?;

    let mut target_ranks = Vec::with_capacity(p.num_sequences());
    let mut included = 0usize;
    // (rows, top1 hits, top10 hits) for [known, target]
    let mut tally = [(0usize, 0usize, 0usize); 2];
    for ((id, row), &true_rank) in ranks
        .sequence_ids()
        .iter()
        .zip(ranks.rows())
        .zip(&true_ranks)
    {
        let rank = row[target_col];
        target_ranks.push(rank as f64);
        included += usize::from(rank <= 10);
        let slot = &mut tally[usize::from(labels.require(id)? == target)];
        slot.0 += 1;
        slot.1 += usize::from(true_rank == 1);
        slot.2 += usize::from(true_rank <= 10);
    }
    let n = true_ranks.len();
    let [known, tgt] = tally;
    Ok(CategoryAnalysis {
        target: target.clone(),
        true_frequency: tgt.0 as f64 / n as f64,
        top10_inclusion_rate: included as f64 / n as f64,
        geometric_mean_rank: geometric_mean(&target_ranks)?,
        accuracy_all: SubsetAccuracy::new(n, known.1 + tgt.1, known.2 + tgt.2),
        accuracy_known_only: SubsetAccuracy::new(known.0, known.1, known.2),
        accuracy_target_only: SubsetAccuracy::new(tgt.0, tgt.1, tgt.2),
    })
}
