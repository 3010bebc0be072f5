//! Alignment-free attribution baselines.
//!
//! The similarity baseline scores queries against a k-mer index, sorts hits by
//! a pseudo-E-value, keeps the first hit per lab, and turns the resulting lab
//! ranking into a probability row with a softmax over reversed ranks. The
//! second baseline is a multinomial naive Bayes over the same k-mer counts.

mod bayes;
mod hits;
mod kmer;

pub use bayes::{nb_predict, nb_train, NaiveBayes};
pub use hits::{
    rank_labs, ranking_to_probabilities, score_hits, sort_hits, Hit, HitList, LabRanking, SortMode,
    DEFAULT_EVALUE_THRESHOLD,
};
pub use kmer::{build_kmer_index, decode_kmer, kmer_profile, KmerIndex, DEFAULT_K, MAX_K};

use crate::data::{CategoryId, PredictionMatrix, SequenceRecord};
use crate::error::{Error, Result};

/// Runs the similarity baseline over `queries` and assembles a prediction
/// matrix with columns `category_ids` (the index's categories if `None`).
pub fn predict_similarity(
    index: &KmerIndex,
    queries: &[SequenceRecord],
    mode: SortMode,
    evalue_threshold: f64,
    category_ids: Option<Vec<CategoryId>>,
) -> Result<PredictionMatrix> {
    let categories = category_ids.unwrap_or_else(|| index.categories());
    let mut values = Vec::with_capacity(queries.len() * categories.len());
    for q in queries {
        let hits = score_hits(q, index, None, evalue_threshold)?;
        let ranking = rank_labs(&hits, index, mode);
        values.extend(ranking_to_probabilities(&ranking, &categories));
    }
    PredictionMatrix::new(
        queries.iter().map(|q| q.sequence_id.clone()).collect(),
        categories,
        values,
    )
}

/// Runs the naive-Bayes baseline; columns follow `category_ids` (the model's
/// categories if `None`), with zero mass on categories the model never saw.
pub fn predict_naive_bayes(
    model: &NaiveBayes,
    queries: &[SequenceRecord],
    category_ids: Option<Vec<CategoryId>>,
) -> Result<PredictionMatrix> {
    let categories = category_ids.unwrap_or_else(|| model.categories().to_vec());
    let cols: Vec<Option<usize>> = model
        .categories()
        .iter()
        .map(|c| categories.iter().position(|x| x == c))
        .collect();
    if cols.iter().all(Option::is_none) {
        return Err(Error::InvalidArgument(
            "none of the model's categories are among the requested columns".into(),
        ));
    }
    let mut values = Vec::with_capacity(queries.len() * categories.len());
    for q in queries {
        let posterior = nb_predict(model, q);
        let mut row = vec![0.0; categories.len()];
        let mut kept = 0.0;
        for (p, col) in posterior.iter().zip(&cols) {
            if let Some(c) = col {
                row[*c] = *p;
                kept += p;
            }
        }
        if kept > 0.0 {
            row.iter_mut().for_each(|v| *v /= kept);
        }
        values.extend(row);
    }
    PredictionMatrix::new(
        queries.iter().map(|q| q.sequence_id.clone()).collect(),
        categories,
        values,
    )
}
