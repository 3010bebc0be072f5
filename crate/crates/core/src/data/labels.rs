use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use indexmap::IndexMap;

use super::{create, csv_error, csv_reader, csv_write_error, open, CategoryId};
use crate::error::{Error, Result};

/// Sequence id to true category, in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelMap {
    entries: IndexMap<String, CategoryId>,
}

impl LabelMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a label, rejecting duplicate sequence ids.
    pub fn insert(&mut self, sequence_id: impl Into<String>, category: CategoryId) -> Result<()> {
        let sequence_id = sequence_id.into();
        if self.entries.contains_key(&sequence_id) {
            return Err(Error::Duplicate {
                kind: "sequence",
                id: sequence_id,
            });
        }
        self.entries.insert(sequence_id, category);
        Ok(())
    }

    pub fn get(&self, sequence_id: &str) -> Option<&CategoryId> {
        self.entries.get(sequence_id)
    }

    /// Like [`get`](Self::get) but with a [`Error::MissingLabel`] on absence.
    pub fn require(&self, sequence_id: &str) -> Result<&CategoryId> {
        self.get(sequence_id)
            .ok_or_else(|| Error::MissingLabel(sequence_id.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &CategoryId)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Distinct categories referenced by the labels, sorted.
    pub fn categories(&self) -> BTreeSet<&CategoryId> {
        self.entries.values().collect()
    }
}

impl<S: Into<String>> FromIterator<(S, CategoryId)> for LabelMap {
    /// Later duplicates overwrite earlier ones; use [`LabelMap::insert`] for
    /// checked construction.
    fn from_iter<T: IntoIterator<Item = (S, CategoryId)>>(iter: T) -> Self {
        LabelMap {
            entries: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    read_labels(open(path)?, &path.display().to_string())
}

/// Parses a `sequence_id,lab_id` CSV with a header row.
pub fn read_labels<R: Read>(reader: R, source: &str) -> Result<LabelMap> {
    let mut rdr = csv_reader(reader);
    let mut labels = LabelMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(source, e))?;
        if i == 0 {
            continue;
        }
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != 2 || rec[0].is_empty() || rec[1].is_empty() {
            return Err(Error::Parse {
                path: source.to_owned(),
                line,
                message: "expected `sequence_id,lab_id`".into(),
            });
        }
        labels.insert(&rec[0], CategoryId::from(&rec[1]))?;
    }
    Ok(labels)
}

pub fn write_labels<W: Write>(labels: &LabelMap, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["sequence_id", "lab_id"])
        .map_err(csv_write_error)?;
    for (id, cat) in labels.iter() {
        wtr.write_record([id, cat.as_str()])
            .map_err(csv_write_error)?;
    }
    wtr.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

pub fn save_labels(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    write_labels(labels, create(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_preserves_order() {
        let labels = read_labels("sequence_id,lab_id\nb,L1\na,L2\n".as_bytes(), "t").unwrap();
        let ids: Vec<_> = labels.iter().map(|(s, _)| s).collect();
        assert_eq!(ids, ["b", "a"]);
        assert_eq!(labels.get("a"), Some(&CategoryId::from("L2")));
    }

    #[test]
    fn duplicate_rejected() {
        let err = read_labels("sequence_id,lab_id\na,L1\na,L2\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(err, Error::Duplicate { .. }));
    }

    #[test]
    fn missing_label_names_sequence() {
        let labels = LabelMap::new();
        let err = labels.require("q7").unwrap_err();
        assert_eq!(err.to_string(), "no label for sequence `q7`");
    }

    #[test]
    fn round_trip() {
        let labels: LabelMap = [("x", CategoryId::from("A")), ("y", CategoryId::from("B"))]
            .into_iter()
            .collect();
        let mut buf = Vec::new();
        write_labels(&labels, &mut buf).unwrap();
        assert_eq!(read_labels(buf.as_slice(), "t").unwrap(), labels);
    }
}
