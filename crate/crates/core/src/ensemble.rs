//! Element-wise probability averaging across predictors.

use std::collections::BTreeSet;

use crate::data::PredictionMatrix;
use crate::error::{Error, Result};

/// Members to average, and optional per-member weights (uniform if `None`).
#[derive(Debug, Clone)]
pub struct EnsembleSpec<'a> {
    pub members: Vec<&'a PredictionMatrix>,
    pub weights: Option<Vec<f64>>,
}

impl<'a> EnsembleSpec<'a> {
    pub fn uniform(members: Vec<&'a PredictionMatrix>) -> Self {
        EnsembleSpec {
            members,
            weights: None,
        }
    }

    pub fn weighted(members: Vec<&'a PredictionMatrix>, weights: Vec<f64>) -> Self {
        EnsembleSpec {
            members,
            weights: Some(weights),
        }
    }
}

fn symmetric_difference<'s>(
    a: impl Iterator<Item = &'s str>,
    b: impl Iterator<Item = &'s str>,
) -> Vec<String> {
    let a: BTreeSet<&str> = a.collect();
    let b: BTreeSet<&str> = b.collect();
    a.symmetric_difference(&b).map(|s| s.to_string()).collect()
}

/// Column/row index of every canonical id inside `member`.
fn alignment(
    canonical: &PredictionMatrix,
    member: &PredictionMatrix,
    which: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let seq_diff = symmetric_difference(
        canonical.sequence_ids().iter().map(String::as_str),
        member.sequence_ids().iter().map(String::as_str),
    );
    let cat_diff = symmetric_difference(
        canonical.category_ids().iter().map(|c| c.as_str()),
        member.category_ids().iter().map(|c| c.as_str()),
    );
    if !seq_diff.is_empty() || !cat_diff.is_empty() {
        return Err(Error::Alignment(format!(
            "member {which} differs from member 0: sequences {{{}}}, categories {{{}}}",
            seq_diff.join(", "),
            cat_diff.join(", ")
        )));
    }
    let rows = canonical
        .sequence_ids()
        .iter()
        .map(|id| member.sequence_index(id).expect("same id set"))
        .collect();
    let cols = canonical
        .category_ids()
        .iter()
        .map(|id| member.category_index(id).expect("same id set"))
        .collect();
    Ok((rows, cols))
}

/// Weighted element-wise mean of the members, aligned by id onto the first
/// member's row and column order.
///
/// With uniform weights each cell is the plain sum over members (in member
/// order) divided by the member count.
pub fn ensemble(spec: &EnsembleSpec<'_>) -> Result<PredictionMatrix> {
    let first = *spec
        .members
        .first()
        .ok_or_else(|| Error::InvalidArgument("ensemble needs at least one member".into()))?;
    if let Some(w) = &spec.weights {
        if w.len() != spec.members.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} members",
                w.len(),
                spec.members.len()
            )));
        }
        if w.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidArgument(
                "weights must be non-negative".into(),
            ));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "weights must sum to 1, got {total}"
            )));
        }
    }

    let alignments = spec
        .members
        .iter()
        .enumerate()
        .map(|(i, m)| alignment(first, m, i))
        .collect::<Result<Vec<_>>>()?;

    let (j, k) = (first.num_sequences(), first.num_categories());
    let mut values = vec![0.0f64; j * k];
    for (member_idx, (member, (rows, cols))) in spec.members.iter().zip(&alignments).enumerate() {
        let weight = spec.weights.as_ref().map(|w| w[member_idx]);
        for (i, &src_row) in rows.iter().enumerate() {
            let src = member.row(src_row);
            let dst = &mut values[i * k..(i + 1) * k];
            for (d, &c) in dst.iter_mut().zip(cols) {
                match weight {
                    Some(w) => *d += w * src[c],
                    None => *d += src[c],
                }
            }
        }
    }
    if spec.weights.is_none() {
        let n = spec.members.len() as f64;
        values.iter_mut().for_each(|v| *v /= n);
    }
    PredictionMatrix::new(
        first.sequence_ids().to_vec(),
        first.category_ids().to_vec(),
        values,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::CategoryId;

    fn m(seqs: &[&str], cats: &[&str], rows: Vec<Vec<f64>>) -> PredictionMatrix {
        PredictionMatrix::from_rows(
            seqs.iter().map(|s| s.to_string()).collect(),
            cats.iter().map(|&c| CategoryId::from(c)).collect(),
            rows,
        )
        .unwrap()
    }

    #[test]
    fn identity() {
        let a = m(&["s"], &["x", "y", "z"], vec![vec![0.1, 0.2, 0.7]]);
        assert_eq!(ensemble(&EnsembleSpec::uniform(vec![&a])).unwrap(), a);
    }

    #[test]
    fn identical_dyadic_members_are_exact() {
        let a = m(&["s"], &["x", "y", "z"], vec![vec![0.125, 0.25, 0.625]]);
        for n in [2, 4, 8] {
            let e = ensemble(&EnsembleSpec::uniform(vec![&a; n])).unwrap();
            assert_eq!(e, a, "{n} copies");
        }
    }

    #[test]
    fn two_one_hots() {
        let a = m(&["s"], &["x", "y"], vec![vec![1.0, 0.0]]);
        let b = m(&["s"], &["x", "y"], vec![vec![0.0, 1.0]]);
        let e = ensemble(&EnsembleSpec::uniform(vec![&a, &b])).unwrap();
        assert_eq!(e.row(0), &[0.5, 0.5]);
    }

    #[test]
    fn aligns_by_id() {
        let a = m(
            &["s", "t"],
            &["x", "y"],
            vec![vec![0.8, 0.2], vec![0.4, 0.6]],
        );
        let b = m(
            &["t", "s"],
            &["y", "x"],
            vec![vec![0.6, 0.4], vec![0.2, 0.8]],
        );
        let e = ensemble(&EnsembleSpec::uniform(vec![&a, &b])).unwrap();
        assert_eq!(e, a);
    }

    #[test]
    fn mismatch_lists_difference() {
        let a = m(&["s", "t"], &["x", "y"], vec![vec![1.0, 0.0]; 2]);
        let b = m(&["s", "u"], &["x", "y"], vec![vec![1.0, 0.0]; 2]);
        let err = ensemble(&EnsembleSpec::uniform(vec![&a, &b])).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("t, u"), "{msg}");
    }

    #[test]
    fn weights() {
        let a = m(&["s"], &["x", "y"], vec![vec![1.0, 0.0]]);
        let b = m(&["s"], &["x", "y"], vec![vec![0.0, 1.0]]);
        let e = ensemble(&EnsembleSpec::weighted(vec![&a, &b], vec![0.75, 0.25])).unwrap();
        assert_eq!(e.row(0), &[0.75, 0.25]);
        assert!(ensemble(&EnsembleSpec::weighted(vec![&a, &b], vec![0.5, 0.6])).is_err());
        assert!(ensemble(&EnsembleSpec::weighted(vec![&a], vec![1.0, 0.0])).is_err());
        assert!(ensemble(&EnsembleSpec::uniform(vec![])).is_err());
    }

    #[test]
    fn member_order_does_not_matter_for_two() {
        let a = m(&["s"], &["x", "y", "z"], vec![vec![0.1, 0.3, 0.6]]);
        let b = m(&["s"], &["x", "y", "z"], vec![vec![0.7, 0.2, 0.1]]);
        let ab = ensemble(&EnsembleSpec::uniform(vec![&a, &b])).unwrap();
        let ba = ensemble(&EnsembleSpec::uniform(vec![&b, &a])).unwrap();
        assert_eq!(ab, ba);
    }
}
