use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{create, open, CategoryId, LabelMap, SequenceRecord};
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 8;
/// Largest k that fits a 2-bit packed `u64`.
pub const MAX_K: usize = 31;

fn encode_base(b: u8) -> Option<u64> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

fn reverse_complement(kmer: u64, k: usize) -> u64 {
    let mut out = 0;
    let mut x = kmer;
    for _ in 0..k {
        out = (out << 2) | (3 - (x & 3));
        x >>= 2;
    }
    out
}

/// Sorted `(kmer, count)` pairs for one sequence. Windows containing anything
/// other than `ACGT` are skipped.
pub fn kmer_profile(dna: &str, k: usize, canonical: bool) -> Vec<(u64, u32)> {
    assert!((1..=MAX_K).contains(&k), "k must be in 1..={MAX_K}");
    let mask = (1u64 << (2 * k)) - 1;
    let mut kmers = Vec::with_capacity(dna.len().saturating_sub(k - 1));
    let mut current = 0u64;
    let mut valid = 0usize;
    for &b in dna.as_bytes() {
        match encode_base(b) {
            Some(code) => {
                current = ((current << 2) | code) & mask;
                valid += 1;
                if valid >= k {
                    let kmer = if canonical {
                        current.min(reverse_complement(current, k))
                    } else {
                        current
                    };
                    kmers.push(kmer);
                }
            }
            None => valid = 0,
        }
    }
    kmers.sort_unstable();
    let mut profile: Vec<(u64, u32)> = Vec::new();
    for kmer in kmers {
        match profile.last_mut() {
            Some((last, n)) if *last == kmer => *n += 1,
            _ => profile.push((kmer, 1)),
        }
    }
    profile
}

/// Decodes a packed k-mer back to its string.
pub fn decode_kmer(kmer: u64, k: usize) -> String {
    (0..k)
        .rev()
        .map(|i| b"ACGT"[((kmer >> (2 * i)) & 3) as usize] as char)
        .collect()
}

/// Inverted index from k-mer to the training sequences containing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmerIndex {
    k: usize,
    canonical: bool,
    /// k-mer -> (insertion ordinal, count), ordinals ascending.
    postings: HashMap<u64, Vec<(u32, u32)>>,
    train_ids: Vec<String>,
    train_labels: Vec<CategoryId>,
}

impl KmerIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn canonical(&self) -> bool {
        self.canonical
    }

    /// Number of training sequences.
    pub fn len(&self) -> usize {
        self.train_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_ids.is_empty()
    }

    pub fn postings(&self, kmer: u64) -> &[(u32, u32)] {
        self.postings.get(&kmer).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn distinct_kmers(&self) -> usize {
        self.postings.len()
    }

    pub(crate) fn all_postings(&self) -> impl Iterator<Item = (&u64, &Vec<(u32, u32)>)> {
        self.postings.iter()
    }

    pub fn train_id(&self, ordinal: usize) -> &str {
        &self.train_ids[ordinal]
    }

    pub fn train_label(&self, ordinal: usize) -> &CategoryId {
        &self.train_labels[ordinal]
    }

    pub fn train_labels(&self) -> &[CategoryId] {
        &self.train_labels
    }

    /// Distinct training categories, sorted.
    pub fn categories(&self) -> Vec<CategoryId> {
        let mut c = self.train_labels.clone();
        c.sort();
        c.dedup();
        c
    }

    pub fn profile(&self, dna: &str) -> Vec<(u64, u32)> {
        kmer_profile(dna, self.k, self.canonical)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        serde_json::to_writer(create(path.as_ref())?, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(open(path.as_ref())?)?)
    }
}

/// Indexes `train` in the given order; that order is the insertion ordinal
/// used to break ties in [`rank_labs`](super::rank_labs).
pub fn build_kmer_index(
    train: &[SequenceRecord],
    labels: &LabelMap,
    k: usize,
    canonical: bool,
) -> Result<KmerIndex> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    if !(1..=MAX_K).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..={MAX_K}, got {k}"
        )));
    }
    let mut postings: HashMap<u64, Vec<(u32, u32)>> = HashMap::new();
    let mut train_ids = Vec::with_capacity(train.len());
    let mut train_labels = Vec::with_capacity(train.len());
    for (ordinal, rec) in train.iter().enumerate() {
        train_labels.push(labels.require(&rec.sequence_id)?.clone());
        train_ids.push(rec.sequence_id.clone());
        for (kmer, count) in kmer_profile(&rec.dna, k, canonical) {
            postings
                .entry(kmer)
                .or_default()
                .push((ordinal as u32, count));
        }
    }
    Ok(KmerIndex {
        k,
        canonical,
        postings,
        train_ids,
        train_labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(profile: &[(u64, u32)], k: usize) -> Vec<(String, u32)> {
        profile
            .iter()
            .map(|&(m, n)| (decode_kmer(m, k), n))
            .collect()
    }

    #[test]
    fn acgtacgt_k4() {
        let p = kmer_profile("ACGTACGT", 4, false);
        assert_eq!(
            named(&p, 4),
            vec![
                ("ACGT".into(), 2),
                ("CGTA".into(), 1),
                ("GTAC".into(), 1),
                ("TACG".into(), 1)
            ]
        );
        assert_eq!(p.iter().map(|x| x.1).sum::<u32>(), 5);
    }

    #[test]
    fn n_windows_skipped() {
        assert!(kmer_profile("ACNGT", 3, false).is_empty());
        assert_eq!(
            named(&kmer_profile("ACGNACG", 3, false), 3),
            vec![("ACG".into(), 2)]
        );
    }

    #[test]
    fn canonical_folds_reverse_complement() {
        // AAC and its reverse complement GTT
        let fwd = kmer_profile("AAC", 3, true);
        let rev = kmer_profile("GTT", 3, true);
        assert_eq!(fwd, rev);
        assert_eq!(named(&fwd, 3), vec![("AAC".into(), 1)]);
        assert_eq!(reverse_complement(0b00_01_10, 3), 0b01_10_11); // ACG -> CGT
    }

    #[test]
    fn build_and_errors() {
        let train = vec![
            SequenceRecord::new("t1", "ACGTACGT", None).unwrap(),
            SequenceRecord::new("t2", "ACGA", None).unwrap(),
        ];
        let labels: LabelMap = [("t1", CategoryId::from("A")), ("t2", CategoryId::from("B"))]
            .into_iter()
            .collect();
        let idx = build_kmer_index(&train, &labels, 4, false).unwrap();
        assert_eq!(idx.len(), 2);
        let acgt = kmer_profile("ACGT", 4, false)[0].0;
        assert_eq!(idx.postings(acgt), &[(0, 2)]);
        assert_eq!(idx.categories(), vec!["A".into(), "B".into()]);

        assert!(build_kmer_index(&[], &labels, 4, false).is_err());
        let partial: LabelMap = [("t1", CategoryId::from("A"))].into_iter().collect();
        assert!(matches!(
            build_kmer_index(&train, &partial, 4, false),
            Err(Error::MissingLabel(_))
        ));
    }
}
