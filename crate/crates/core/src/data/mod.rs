//! Domain types and file ingestion.
//!
//! Every loader has a reader-based twin (`read_*`) and a writer (`write_*`)
//! so that artifacts produced by this crate re-ingest through the same path
//! used for external submissions.

mod labels;
mod matrix;
mod sequence;
mod validate;

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use labels::{load_labels, read_labels, save_labels, write_labels, LabelMap};
pub use matrix::{
    load_predictions, read_predictions, save_predictions, write_predictions, PredictionMatrix,
};
pub use sequence::{
    load_fasta, load_lineage, load_metadata, read_fasta, read_lineage, read_metadata, save_fasta,
    write_fasta, write_lineage, LineageGraph, SequenceRecord, METADATA_FIELDS,
};
pub use validate::{validate, ValidationReport, ROW_SUM_TOLERANCE};

/// Opaque category (lab) token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryId(String);

impl CategoryId {
    pub fn new(id: impl Into<String>) -> Self {
        CategoryId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CategoryId {
    fn from(s: &str) -> Self {
        CategoryId(s.to_owned())
    }
}

impl From<String> for CategoryId {
    fn from(s: String) -> Self {
        CategoryId(s)
    }
}

impl AsRef<str> for CategoryId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_reader<R: std::io::Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

pub(crate) fn csv_error(source: &str, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        path: source.to_owned(),
        line,
        message: err.to_string(),
    }
}

pub(crate) fn csv_write_error(err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::io("<writer>", e),
        other => Error::Shape(format!("{other:?}")),
    }
}
