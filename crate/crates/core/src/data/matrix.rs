use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{create, csv_error, csv_reader, csv_write_error, open, CategoryId};
use crate::error::{Error, Result};

/// J×K matrix of per-sequence category probabilities, stored row-major.
///
/// Construction checks shape and id uniqueness only. Row sums and value
/// ranges are validation findings (see [`validate`](super::validate)), so a
/// malformed submission can still be loaded and inspected.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    sequence_ids: Vec<String>,
    category_ids: Vec<CategoryId>,
    values: Vec<f64>,
    sequence_index: HashMap<String, usize>,
    category_index: HashMap<CategoryId, usize>,
}

impl PredictionMatrix {
    pub fn new(
        sequence_ids: Vec<String>,
        category_ids: Vec<CategoryId>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if sequence_ids.is_empty() || category_ids.is_empty() {
            return Err(Error::Shape(format!(
                "prediction matrix must be non-empty, got {}x{}",
                sequence_ids.len(),
                category_ids.len()
            )));
        }
        if values.len() != sequence_ids.len() * category_ids.len() {
            return Err(Error::Shape(format!(
                "expected {} values for a {}x{} matrix, got {}",
                sequence_ids.len() * category_ids.len(),
                sequence_ids.len(),
                category_ids.len(),
                values.len()
            )));
        }
        let mut sequence_index = HashMap::with_capacity(sequence_ids.len());
        for (i, id) in sequence_ids.iter().enumerate() {
            if sequence_index.insert(id.clone(), i).is_some() {
                return Err(Error::Duplicate {
                    kind: "sequence",
                    id: id.clone(),
                });
            }
        }
        let mut category_index = HashMap::with_capacity(category_ids.len());
        for (i, id) in category_ids.iter().enumerate() {
            if category_index.insert(id.clone(), i).is_some() {
                return Err(Error::Duplicate {
                    kind: "category",
                    id: id.to_string(),
                });
            }
        }
        Ok(PredictionMatrix {
            sequence_ids,
            category_ids,
            values,
            sequence_index,
            category_index,
        })
    }

    /// Builds a matrix from per-row vectors.
    pub fn from_rows(
        sequence_ids: Vec<String>,
        category_ids: Vec<CategoryId>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = category_ids.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != k) {
            return Err(Error::Shape(format!(
                "row {i} has {} values, expected {k}",
                row.len()
            )));
        }
        PredictionMatrix::new(sequence_ids, category_ids, rows.concat())
    }

    pub fn num_sequences(&self) -> usize {
        self.sequence_ids.len()
    }

    pub fn num_categories(&self) -> usize {
        self.category_ids.len()
    }

    pub fn sequence_ids(&self) -> &[String] {
        &self.sequence_ids
    }

    pub fn category_ids(&self) -> &[CategoryId] {
        &self.category_ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.category_ids.len();
        &self.values[i * k..(i + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.category_ids.len())
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.category_ids.len() + col]
    }

    pub fn sequence_index(&self, id: &str) -> Option<usize> {
        self.sequence_index.get(id).copied()
    }

    pub fn category_index(&self, id: &CategoryId) -> Option<usize> {
        self.category_index.get(id).copied()
    }
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<PredictionMatrix> {
    let path = path.as_ref();
    read_predictions(open(path)?, &path.display().to_string())
}

/// Parses a `sequence_id,<cat1>,<cat2>,...` CSV. Row order is preserved.
pub fn read_predictions<R: Read>(reader: R, source: &str) -> Result<PredictionMatrix> {
    let mut rdr = csv_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| csv_error(source, e))?,
        None => {
            return Err(Error::Parse {
                path: source.to_owned(),
                line: 1,
                message: "missing header row".into(),
            })
        }
    };
    if header.len() < 2 {
        return Err(Error::Parse {
            path: source.to_owned(),
            line: 1,
            message: "header must contain `sequence_id` and at least one category".into(),
        });
    }
    let category_ids: Vec<CategoryId> = header.iter().skip(1).map(CategoryId::from).collect();
    let k = category_ids.len();

    let mut sequence_ids = Vec::new();
    let mut values = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(source, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != k + 1 {
            return Err(Error::Parse {
                path: source.to_owned(),
                line,
                message: format!("expected {} fields, found {}", k + 1, rec.len()),
            });
        }
        sequence_ids.push(rec[0].to_owned());
        for (col, cell) in rec.iter().skip(1).enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                path: source.to_owned(),
                line,
                message: format!(
                    "non-numeric value `{cell}` in column `{}`",
                    category_ids[col]
                ),
            })?;
            values.push(v);
        }
    }
    if sequence_ids.is_empty() {
        return Err(Error::Parse {
            path: source.to_owned(),
            line: 2,
            message: "no data rows".into(),
        });
    }
    PredictionMatrix::new(sequence_ids, category_ids, values)
}

/// Writes the matrix as CSV using the shortest decimal form that parses back
/// to the identical `f64`.
pub fn write_predictions<W: Write>(matrix: &PredictionMatrix, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = Vec::with_capacity(matrix.num_categories() + 1);
    header.push("sequence_id");
    header.extend(matrix.category_ids().iter().map(CategoryId::as_str));
    wtr.write_record(&header).map_err(csv_write_error)?;
    let mut buf: Vec<String> = Vec::with_capacity(matrix.num_categories() + 1);
    for (id, row) in matrix.sequence_ids().iter().zip(matrix.rows()) {
        buf.clear();
        buf.push(id.clone());
        buf.extend(row.iter().map(|v| v.to_string()));
        wtr.write_record(&buf).map_err(csv_write_error)?;
    }
    wtr.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

pub fn save_predictions(matrix: &PredictionMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_predictions(matrix, create(path.as_ref())?)
}
