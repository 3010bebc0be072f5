use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use indexmap::IndexMap;

use super::{create, csv_error, csv_reader, csv_write_error, open};
use crate::error::{Error, Result};

/// Raw metadata fields a record may carry. Values are the raw repository
/// strings; [`encode_metadata`](crate::prep::encode_metadata) maps them to
/// one-hot columns.
pub const METADATA_FIELDS: [&str; 6] = [
    "growth_strain",
    "growth_temp",
    "copy_number",
    "species",
    "bacterial_resistance",
    "selectable_markers",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceRecord {
    pub sequence_id: String,
    /// Upper-case sequence over `ACGTN`.
    pub dna: String,
    /// Raw (pre-pooling) lab token, when known.
    pub lab_id: Option<String>,
    /// Raw metadata keyed by a name from [`METADATA_FIELDS`].
    pub metadata: BTreeMap<String, String>,
}

impl SequenceRecord {
    pub fn new(sequence_id: impl Into<String>, dna: &str, lab_id: Option<&str>) -> Result<Self> {
        let sequence_id = sequence_id.into();
        let dna = normalize_dna(dna).map_err(|c| {
            Error::InvalidArgument(format!(
                "record `{sequence_id}` contains invalid nucleotide `{c}`"
            ))
        })?;
        if dna.is_empty() {
            return Err(Error::EmptySequence(sequence_id));
        }
        Ok(SequenceRecord {
            sequence_id,
            dna,
            lab_id: lab_id.map(str::to_owned),
            metadata: BTreeMap::new(),
        })
    }
}

/// Upper-cases and maps IUPAC ambiguity codes to `N`. Whitespace is dropped.
fn normalize_dna(raw: &str) -> std::result::Result<String, char> {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c.to_ascii_uppercase() {
            b @ ('A' | 'C' | 'G' | 'T' | 'N') => out.push(b),
            'U' => out.push('T'),
            'R' | 'Y' | 'S' | 'W' | 'K' | 'M' | 'B' | 'D' | 'H' | 'V' => out.push('N'),
            c if c.is_whitespace() => {}
            other => return Err(other),
        }
    }
    Ok(out)
}

pub fn load_fasta(path: impl AsRef<Path>) -> Result<Vec<SequenceRecord>> {
    let path = path.as_ref();
    read_fasta(open(path)?, &path.display().to_string())
}

/// Parses multi-record FASTA with headers of the form `>sequence_id [lab_id]`.
pub fn read_fasta<R: Read>(reader: R, source: &str) -> Result<Vec<SequenceRecord>> {
    struct Pending {
        id: String,
        lab: Option<String>,
        body: String,
        line: u64,
    }

    fn finish(p: Pending, source: &str, seen: &mut HashSet<String>) -> Result<SequenceRecord> {
        if !seen.insert(p.id.clone()) {
            return Err(Error::Duplicate {
                kind: "sequence",
                id: p.id,
            });
        }
        if p.body.is_empty() {
            return Err(Error::EmptySequence(p.id));
        }
        let dna = normalize_dna(&p.body).map_err(|c| Error::Parse {
            path: source.to_owned(),
            line: p.line,
            message: format!("invalid nucleotide `{c}` in record `{}`", p.id),
        })?;
        Ok(SequenceRecord {
            sequence_id: p.id,
            dna,
            lab_id: p.lab,
            metadata: BTreeMap::new(),
        })
    }

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut current: Option<Pending> = None;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim_end();
        if let Some(header) = line.strip_prefix('>') {
            if let Some(p) = current.take() {
                records.push(finish(p, source, &mut seen)?);
            }
            let mut fields = header.split_whitespace();
            let id = fields.next().ok_or_else(|| Error::Parse {
                path: source.to_owned(),
                line: line_no,
                message: "FASTA header without a sequence id".into(),
            })?;
            current = Some(Pending {
                id: id.to_owned(),
                lab: fields.next().map(str::to_owned),
                body: String::new(),
                line: line_no,
            });
        } else if line.trim().is_empty() {
            continue;
        } else {
            match current.as_mut() {
                Some(p) => p.body.push_str(line.trim()),
                None => {
                    return Err(Error::Parse {
                        path: source.to_owned(),
                        line: line_no,
                        message: "sequence data before the first header".into(),
                    })
                }
            }
        }
    }
    if let Some(p) = current.take() {
        records.push(finish(p, source, &mut seen)?);
    }
    Ok(records)
}

/// Writes one header line and one sequence line per record.
pub fn write_fasta<W: Write>(records: &[SequenceRecord], mut writer: W) -> Result<()> {
    let io = |e| Error::io("<writer>", e);
    for r in records {
        match &r.lab_id {
            Some(lab) => writeln!(writer, ">{} {}", r.sequence_id, lab).map_err(io)?,
            None => writeln!(writer, ">{}", r.sequence_id).map_err(io)?,
        }
        writeln!(writer, "{}", r.dna).map_err(io)?;
    }
    writer.flush().map_err(io)
}

pub fn save_fasta(records: &[SequenceRecord], path: impl AsRef<Path>) -> Result<()> {
    write_fasta(records, create(path.as_ref())?)
}

pub fn load_metadata(path: impl AsRef<Path>) -> Result<IndexMap<String, BTreeMap<String, String>>> {
    let path = path.as_ref();
    read_metadata(open(path)?, &path.display().to_string())
}

/// Parses a metadata CSV whose header is `sequence_id` followed by any subset
/// of [`METADATA_FIELDS`]. Empty cells are treated as absent.
pub fn read_metadata<R: Read>(
    reader: R,
    source: &str,
) -> Result<IndexMap<String, BTreeMap<String, String>>> {
    let mut rdr = csv_reader(reader);
    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(h) => h.map_err(|e| csv_error(source, e))?,
        None => return Ok(IndexMap::new()),
    };
    if header.get(0) != Some("sequence_id") {
        return Err(Error::Parse {
            path: source.to_owned(),
            line: 1,
            message: "first metadata column must be `sequence_id`".into(),
        });
    }
    let fields: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if let Some(bad) = fields
        .iter()
        .find(|f| !METADATA_FIELDS.contains(&f.as_str()))
    {
        return Err(Error::Parse {
            path: source.to_owned(),
            line: 1,
            message: format!("unknown metadata field `{bad}`"),
        });
    }
    let mut out = IndexMap::new();
    for rec in rows {
        let rec = rec.map_err(|e| csv_error(source, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != fields.len() + 1 {
            return Err(Error::Parse {
                path: source.to_owned(),
                line,
                message: format!("expected {} fields, found {}", fields.len() + 1, rec.len()),
            });
        }
        let values: BTreeMap<String, String> = fields
            .iter()
            .zip(rec.iter().skip(1))
            .filter(|(_, v)| !v.is_empty())
            .map(|(f, v)| (f.clone(), v.to_owned()))
            .collect();
        if out.insert(rec[0].to_owned(), values).is_some() {
            return Err(Error::Duplicate {
                kind: "sequence",
                id: rec[0].to_owned(),
            });
        }
    }
    Ok(out)
}

/// Undirected acknowledgement edges between sequences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineageGraph {
    edges: Vec<(String, String)>,
}

impl LineageGraph {
    pub fn new(edges: Vec<(String, String)>) -> Result<Self> {
        if let Some((a, _)) = edges.iter().find(|(a, b)| a == b) {
            return Err(Error::SelfLoop(a.clone()));
        }
        Ok(LineageGraph { edges })
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Fails on the first edge with an endpoint outside `known`.
    pub fn check_endpoints(&self, known: &HashSet<&str>) -> Result<()> {
        for (a, b) in &self.edges {
            for end in [a, b] {
                if !known.contains(end.as_str()) {
                    return Err(Error::DanglingEndpoint {
                        a: a.clone(),
                        b: b.clone(),
                        missing: end.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Loads an `id_a,id_b` edge list and checks every endpoint against `known_ids`.
pub fn load_lineage<'a>(
    path: impl AsRef<Path>,
    known_ids: impl IntoIterator<Item = &'a str>,
) -> Result<LineageGraph> {
    let path = path.as_ref();
    let graph = read_lineage(open(path)?, &path.display().to_string())?;
    graph.check_endpoints(&known_ids.into_iter().collect())?;
    Ok(graph)
}

pub fn read_lineage<R: Read>(reader: R, source: &str) -> Result<LineageGraph> {
    let mut rdr = csv_reader(reader);
    let mut edges = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(source, e))?;
        if i == 0 {
            continue;
        }
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::Parse {
                path: source.to_owned(),
                line: rec.position().map(|p| p.line()).unwrap_or(0),
                message: "expected `id_a,id_b`".into(),
            });
        }
        edges.push((rec[0].to_owned(), rec[1].to_owned()));
    }
    LineageGraph::new(edges)
}

pub fn write_lineage<W: Write>(graph: &LineageGraph, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["id_a", "id_b"])
        .map_err(csv_write_error)?;
    for (a, b) in graph.edges() {
        wtr.write_record([a, b]).map_err(csv_write_error)?;
    }
    wtr.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}
