use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{csv_write_error, CategoryId, SequenceRecord};
use crate::error::{Error, Result};

pub const DEFAULT_POOL_THRESHOLD: usize = 10;

/// Token for the composite category of pooled small labs
/// (displayed as "Unknown Engineered").
pub const UNKNOWN_ENGINEERED: &str = "unknown_engineered";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryPooling {
    pub threshold: usize,
    pub composite_id: CategoryId,
    /// Raw lab id to category, total over observed labs.
    pub mapping: BTreeMap<String, CategoryId>,
    /// Records per raw lab.
    pub lab_sizes: BTreeMap<String, usize>,
}

impl CategoryPooling {
    pub fn category_of(&self, lab_id: &str) -> Option<&CategoryId> {
        self.mapping.get(lab_id)
    }

    /// Record count per resulting category.
    pub fn category_sizes(&self) -> BTreeMap<&CategoryId, usize> {
        let mut sizes = BTreeMap::new();
        for (lab, n) in &self.lab_sizes {
            *sizes.entry(&self.mapping[lab]).or_insert(0) += n;
        }
        sizes
    }

    pub fn num_categories(&self) -> usize {
        self.category_sizes().len()
    }

    /// `lab_id,category_id`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["lab_id", "category_id"])
            .map_err(csv_write_error)?;
        for (lab, cat) in &self.mapping {
            wtr.write_record([lab.as_str(), cat.as_str()])
                .map_err(csv_write_error)?;
        }
        wtr.flush().map_err(|e| Error::io("<writer>", e))?;
        Ok(())
    }
}

/// Maps labs with fewer than `threshold` records onto `composite_id`; all
/// other labs map to themselves. Every record must carry a lab id.
pub fn pool_small_labs(
    records: &[SequenceRecord],
    threshold: usize,
    composite_id: &CategoryId,
) -> Result<CategoryPooling> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to pool".into()));
    }
    let mut lab_sizes: BTreeMap<String, usize> = BTreeMap::new();
    for r in records {
        let lab = r.lab_id.as_ref().ok_or_else(|| {
            Error::InvalidArgument(format!("record `{}` has no lab id", r.sequence_id))
        })?;
        *lab_sizes.entry(lab.clone()).or_insert(0) += 1;
    }
    if lab_sizes.contains_key(composite_id.as_str()) {
        return Err(Error::InvalidArgument(format!(
            "composite id `{composite_id}` collides with a raw lab id"
        )));
    }
    let mapping = lab_sizes
        .iter()
        .map(|(lab, &n)| {
            let cat = if n >= threshold {
                CategoryId::from(lab.as_str())
            } else {
                composite_id.clone()
            };
            (lab.clone(), cat)
        })
        .collect();
    Ok(CategoryPooling {
        threshold,
        composite_id: composite_id.clone(),
        mapping,
        lab_sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(labs: &[(&str, usize)]) -> Vec<SequenceRecord> {
        let mut out = Vec::new();
        for (lab, n) in labs {
            for i in 0..*n {
                out.push(SequenceRecord::new(format!("{lab}_{i}"), "ACGT", Some(lab)).unwrap());
            }
        }
        out
    }

    #[test]
    fn pools_small_lab() {
        let p = pool_small_labs(
            &records(&[("A", 12), ("B", 3)]),
            10,
            &UNKNOWN_ENGINEERED.into(),
        )
        .unwrap();
        assert_eq!(p.category_of("A"), Some(&CategoryId::from("A")));
        assert_eq!(
            p.category_of("B"),
            Some(&CategoryId::from(UNKNOWN_ENGINEERED))
        );
        assert_eq!(p.num_categories(), 2);
    }

    #[test]
    fn identity_when_all_large() {
        let p = pool_small_labs(
            &records(&[("A", 10), ("B", 11)]),
            10,
            &UNKNOWN_ENGINEERED.into(),
        )
        .unwrap();
        assert!(p.mapping.iter().all(|(lab, cat)| lab == cat.as_str()));
        assert!(!p
            .category_sizes()
            .contains_key(&CategoryId::from(UNKNOWN_ENGINEERED)));
    }

    #[test]
    fn sizes_are_conserved() {
        let recs = records(&[("A", 15), ("B", 3), ("C", 9), ("D", 1)]);
        let p = pool_small_labs(&recs, 10, &UNKNOWN_ENGINEERED.into()).unwrap();
        let sizes = p.category_sizes();
        assert_eq!(sizes.values().sum::<usize>(), recs.len());
        assert_eq!(sizes[&CategoryId::from(UNKNOWN_ENGINEERED)], 13);
    }

    #[test]
    fn errors() {
        assert!(pool_small_labs(&[], 10, &UNKNOWN_ENGINEERED.into()).is_err());
        let unlabelled = vec![SequenceRecord::new("x", "A", None).unwrap()];
        assert!(pool_small_labs(&unlabelled, 10, &UNKNOWN_ENGINEERED.into()).is_err());
        let clash = records(&[(UNKNOWN_ENGINEERED, 2)]);
        assert!(pool_small_labs(&clash, 10, &UNKNOWN_ENGINEERED.into()).is_err());
    }
}
