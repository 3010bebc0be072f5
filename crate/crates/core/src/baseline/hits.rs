use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kmer::KmerIndex;
use crate::data::{CategoryId, SequenceRecord};
use crate::error::{Error, Result};

pub const DEFAULT_EVALUE_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    /// Insertion ordinal of the training sequence.
    pub input_order: usize,
    /// Shared k-mer count, `sum(min(query_count, train_count))`.
    pub score: u32,
    /// `D / (1 + score)` with `D` the number of training sequences.
    pub pseudo_evalue: f64,
}

/// Hits for one query, in index insertion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitList {
    pub query_id: String,
    pub hits: Vec<Hit>,
}

/// Scores `query` against every training sequence sharing a k-mer with it.
///
/// `k`, when given, must match the index.
pub fn score_hits(
    query: &SequenceRecord,
    index: &KmerIndex,
    k: Option<usize>,
    evalue_threshold: f64,
) -> Result<HitList> {
    if let Some(k) = k {
        if k != index.k() {
            return Err(Error::KMismatch {
                index: index.k(),
                requested: k,
            });
        }
    }
    let mut scores = vec![0u32; index.len()];
    for (kmer, query_count) in index.profile(&query.dna) {
        for &(ordinal, train_count) in index.postings(kmer) {
            scores[ordinal as usize] += query_count.min(train_count);
        }
    }
    let db_size = index.len() as f64;
    let hits = scores
        .into_iter()
        .enumerate()
        .filter(|&(_, s)| s > 0)
        .map(|(input_order, score)| Hit {
            input_order,
            score,
            pseudo_evalue: db_size / (1.0 + score as f64),
        })
        .filter(|h| h.pseudo_evalue <= evalue_threshold)
        .collect();
    Ok(HitList {
        query_id: query.sequence_id.clone(),
        hits,
    })
}

/// How hits with equal pseudo-E-values are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortMode {
    /// Ties keep insertion order (merge-sort behaviour).
    Stable,
    /// Ties are shuffled with a seeded RNG, modelling an unstable sort's
    /// unspecified order reproducibly.
    Unstable { seed: u64 },
}

/// Labs ordered by first appearance in the sorted hit list; rank = position + 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabRanking {
    pub query_id: String,
    pub labs: Vec<CategoryId>,
}

impl LabRanking {
    pub fn rank_of(&self, lab: &CategoryId) -> Option<usize> {
        self.labs.iter().position(|l| l == lab).map(|p| p + 1)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf29ce484222325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x100000001b3)
    })
}

/// Sorts a copy of `hits` ascending by pseudo-E-value per `mode`.
pub fn sort_hits(hits: &HitList, mode: SortMode) -> Vec<Hit> {
    let mut sorted = hits.hits.clone();
    sorted.sort_by(|a, b| a.pseudo_evalue.total_cmp(&b.pseudo_evalue));
    if let SortMode::Unstable { seed } = mode {
        // per-query stream so results do not depend on query processing order
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(hits.query_id.as_bytes()));
        let mut start = 0;
        while start < sorted.len() {
            let mut end = start + 1;
            while end < sorted.len() && sorted[end].pseudo_evalue == sorted[start].pseudo_evalue {
                end += 1;
            }
            sorted[start..end].shuffle(&mut rng);
            start = end;
        }
    }
    sorted
}

/// Sort, keep the first hit per lab, rank labs by order of occurrence.
pub fn rank_labs(hits: &HitList, index: &KmerIndex, mode: SortMode) -> LabRanking {
    let mut seen = HashSet::new();
    let labs = sort_hits(hits, mode)
        .into_iter()
        .map(|h| index.train_label(h.input_order))
        .filter(|lab| seen.insert(*lab))
        .cloned()
        .collect();
    LabRanking {
        query_id: hits.query_id.clone(),
        labs,
    }
}

/// Reverses ranks (best lab gets the largest value `L`) and applies a softmax
/// over the ranked labs; unranked categories get 0. Labs outside
/// `category_ids` are skipped and the rest re-ranked. With nothing ranked the
/// row is uniform.
pub fn ranking_to_probabilities(ranking: &LabRanking, category_ids: &[CategoryId]) -> Vec<f64> {
    let k = category_ids.len();
    let cols: Vec<usize> = ranking
        .labs
        .iter()
        .filter_map(|lab| category_ids.iter().position(|c| c == lab))
        .collect();
    if cols.is_empty() {
        return vec![1.0 / k as f64; k];
    }
    let l = cols.len();
    // raw value L - r + 1 for rank r; shift by the max (L) before exponentiating
    let weights: Vec<f64> = (1..=l)
        .map(|r| ((l - r + 1) as f64 - l as f64).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let mut row = vec![0.0; k];
    for (&c, w) in cols.iter().zip(weights) {
        row[c] = w / total;
    }
    row
}
