use std::collections::HashMap;

use super::kmer::{kmer_profile, KmerIndex};
use crate::data::{CategoryId, LabelMap, SequenceRecord};
use crate::error::{Error, Result};

/// Multinomial naive Bayes over k-mer counts with additive smoothing.
///
/// The vocabulary is the set of k-mers seen in training; query k-mers outside
/// it carry no evidence.
#[derive(Debug, Clone)]
pub struct NaiveBayes {
    k: usize,
    canonical: bool,
    alpha: f64,
    categories: Vec<CategoryId>,
    log_priors: Vec<f64>,
    /// k-mer -> (category, count) for categories where it occurs.
    counts: HashMap<u64, Vec<(u32, u64)>>,
    /// `ln(N_c + alpha * V)` per category.
    log_norm: Vec<f64>,
}

impl NaiveBayes {
    fn from_counts(
        k: usize,
        canonical: bool,
        alpha: f64,
        categories: Vec<CategoryId>,
        records_per_category: Vec<usize>,
        counts: HashMap<u64, Vec<(u32, u64)>>,
    ) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        let n_records: usize = records_per_category.iter().sum();
        let log_priors = records_per_category
            .iter()
            .map(|&n| (n as f64 / n_records as f64).ln())
            .collect();
        let vocab = counts.len() as f64;
        let mut totals = vec![0u64; categories.len()];
        for per_cat in counts.values() {
            for &(c, n) in per_cat {
                totals[c as usize] += n;
            }
        }
        let log_norm = totals
            .iter()
            .map(|&t| (t as f64 + alpha * vocab).ln())
            .collect();
        Ok(NaiveBayes {
            k,
            canonical,
            alpha,
            categories,
            log_priors,
            counts,
            log_norm,
        })
    }

    /// Derives class counts from an existing k-mer index.
    pub fn from_index(index: &KmerIndex, alpha: f64) -> Result<Self> {
        let categories = index.categories();
        let cat_of: HashMap<&CategoryId, u32> = categories
            .iter()
            .enumerate()
            .map(|(i, c)| (c, i as u32))
            .collect();
        let label_idx: Vec<u32> = index.train_labels().iter().map(|l| cat_of[l]).collect();
        let mut per_category = vec![0usize; categories.len()];
        for &c in &label_idx {
            per_category[c as usize] += 1;
        }
        let mut counts = HashMap::with_capacity(index.distinct_kmers());
        for (&kmer, postings) in index.all_postings() {
            counts.insert(
                kmer,
                merge_postings(
                    postings
                        .iter()
                        .map(|&(o, n)| (label_idx[o as usize], n as u64)),
                ),
            );
        }
        NaiveBayes::from_counts(
            index.k(),
            index.canonical(),
            alpha,
            categories,
            per_category,
            counts,
        )
    }

    pub fn categories(&self) -> &[CategoryId] {
        &self.categories
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Unnormalised log posterior per category.
    pub fn log_posterior(&self, dna: &str) -> Vec<f64> {
        let mut scores = self.log_priors.clone();
        let ln_alpha = self.alpha.ln();
        let mut in_vocab = 0u64;
        for (kmer, q) in kmer_profile(dna, self.k, self.canonical) {
            let Some(per_cat) = self.counts.get(&kmer) else {
                continue;
            };
            let q = q as f64;
            in_vocab += q as u64;
            // every category gets ln(alpha); categories that saw the k-mer
            // get the correction ln(n + alpha) - ln(alpha)
            for s in scores.iter_mut() {
                *s += q * ln_alpha;
            }
            for &(c, n) in per_cat {
                scores[c as usize] += q * ((n as f64 + self.alpha).ln() - ln_alpha);
            }
        }
        for (s, norm) in scores.iter_mut().zip(&self.log_norm) {
            *s -= in_vocab as f64 * norm;
        }
        scores
    }
}

fn merge_postings(items: impl Iterator<Item = (u32, u64)>) -> Vec<(u32, u64)> {
    let mut v: Vec<(u32, u64)> = items.collect();
    v.sort_unstable_by_key(|x| x.0);
    let mut out: Vec<(u32, u64)> = Vec::with_capacity(v.len());
    for (c, n) in v {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += n,
            _ => out.push((c, n)),
        }
    }
    out
}

/// Trains on `train`; class priors are proportional to record counts.
pub fn nb_train(
    train: &[SequenceRecord],
    labels: &LabelMap,
    k: usize,
    alpha: f64,
    canonical: bool,
) -> Result<NaiveBayes> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    let mut categories: Vec<CategoryId> = train
        .iter()
        .map(|r| labels.require(&r.sequence_id).cloned())
        .collect::<Result<_>>()?;
    categories.sort();
    categories.dedup();
    let cat_of: HashMap<&CategoryId, u32> = categories
        .iter()
        .enumerate()
        .map(|(i, c)| (c, i as u32))
        .collect();
    let mut per_category = vec![0usize; categories.len()];
    let mut raw: HashMap<u64, Vec<(u32, u64)>> = HashMap::new();
    for r in train {
        let c = cat_of[labels.require(&r.sequence_id)?];
        per_category[c as usize] += 1;
        for (kmer, n) in kmer_profile(&r.dna, k, canonical) {
            raw.entry(kmer).or_default().push((c, n as u64));
        }
    }
    let counts = raw
        .into_iter()
        .map(|(kmer, v)| (kmer, merge_postings(v.into_iter())))
        .collect();
    NaiveBayes::from_counts(k, canonical, alpha, categories, per_category, counts)
}

/// Normalised posterior over `model.categories()`.
pub fn nb_predict(model: &NaiveBayes, query: &SequenceRecord) -> Vec<f64> {
    let logp = model.log_posterior(&query.dna);
    let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logp.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|v| v / total).collect()
}
