use std::io::Write;

use crate::data::{csv_write_error, SequenceRecord};
use crate::error::{Error, Result};

struct Group {
    field: &'static str,
    values: &'static [&'static str],
    multi: bool,
}

const GROUPS: [Group; 6] = [
    Group {
        field: "growth_strain",
        values: &[
            "ccdb_survival",
            "dh10b",
            "dh5alpha",
            "neb_stable",
            "other",
            "stbl3",
            "top10",
            "xl1_blue",
        ],
        multi: false,
    },
    Group {
        field: "growth_temp",
        values: &["30", "37", "other"],
        multi: false,
    },
    Group {
        field: "copy_number",
        values: &["high_copy", "low_copy", "unknown"],
        multi: false,
    },
    Group {
        field: "species",
        values: &[
            "budding_yeast",
            "fly",
            "human",
            "mouse",
            "mustard_weed",
            "nematode",
            "other",
            "rat",
            "synthetic",
            "zebrafish",
        ],
        multi: false,
    },
    Group {
        field: "bacterial_resistance",
        values: &[
            "ampicillin",
            "chloramphenicol",
            "kanamycin",
            "other",
            "spectinomycin",
        ],
        multi: false,
    },
    Group {
        field: "selectable_markers",
        values: &[
            "blasticidin",
            "his3",
            "hygromycin",
            "leu2",
            "neomycin",
            "other",
            "puromycin",
            "trp1",
            "ura3",
            "zeocin",
        ],
        multi: true,
    },
];

/// The 39 one-hot column names, in output order.
pub const ONE_HOT_COLUMNS: [&str; 39] = [
    "growth_strain_ccdb_survival",
    "growth_strain_dh10b",
    "growth_strain_dh5alpha",
    "growth_strain_neb_stable",
    "growth_strain_other",
    "growth_strain_stbl3",
    "growth_strain_top10",
    "growth_strain_xl1_blue",
    "growth_temp_30",
    "growth_temp_37",
    "growth_temp_other",
    "copy_number_high_copy",
    "copy_number_low_copy",
    "copy_number_unknown",
    "species_budding_yeast",
    "species_fly",
    "species_human",
    "species_mouse",
    "species_mustard_weed",
    "species_nematode",
    "species_other",
    "species_rat",
    "species_synthetic",
    "species_zebrafish",
    "bacterial_resistance_ampicillin",
    "bacterial_resistance_chloramphenicol",
    "bacterial_resistance_kanamycin",
    "bacterial_resistance_other",
    "bacterial_resistance_spectinomycin",
    "selectable_markers_blasticidin",
    "selectable_markers_his3",
    "selectable_markers_hygromycin",
    "selectable_markers_leu2",
    "selectable_markers_neomycin",
    "selectable_markers_other",
    "selectable_markers_puromycin",
    "selectable_markers_trp1",
    "selectable_markers_ura3",
    "selectable_markers_zeocin",
];

/// Lower-cases and collapses every run of non-alphanumerics to `_`.
fn normalize(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.trim().chars().flat_map(char::to_lowercase) {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_owned()
}

/// Temperatures are matched numerically: `37`, `37C`, `37 °C` and `37.0` all
/// select the 37 column.
fn normalize_temperature(raw: &str) -> String {
    let numeric: String = raw
        .trim()
        .trim_end_matches(['c', 'C'])
        .trim_end_matches('°')
        .trim()
        .to_owned();
    match numeric.parse::<f64>() {
        Ok(30.0) => "30".into(),
        Ok(37.0) => "37".into(),
        Ok(_) => "other".into(),
        Err(_) => normalize(raw),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotTable {
    pub columns: Vec<&'static str>,
    pub sequence_ids: Vec<String>,
    pub rows: Vec<Vec<u8>>,
}

impl OneHotTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// `sequence_id,<39 columns>`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["sequence_id"];
        header.extend(self.columns.iter().copied());
        wtr.write_record(&header).map_err(csv_write_error)?;
        for (id, row) in self.sequence_ids.iter().zip(&self.rows) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(u8::to_string));
            wtr.write_record(&rec).map_err(csv_write_error)?;
        }
        wtr.flush().map_err(|e| Error::io("<writer>", e))?;
        Ok(())
    }
}

/// One-hot encodes each record's raw metadata.
///
/// Unrecognised values fall back to the group's `_other` column; a group
/// without one (copy number) rejects them. Missing or `none` values leave the
/// group all-zero. Selectable markers may list several values separated by
/// `;`, `,`, `/` or `|`, each setting its own column.
pub fn encode_metadata(records: &[SequenceRecord]) -> Result<OneHotTable> {
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        let mut row = vec![0u8; ONE_HOT_COLUMNS.len()];
        let mut offset = 0;
        for g in &GROUPS {
            if let Some(raw) = r.metadata.get(g.field) {
                let parts: Vec<&str> = if g.multi {
                    raw.split([';', ',', '/', '|']).collect()
                } else {
                    vec![raw.as_str()]
                };
                for part in parts {
                    let key = if g.field == "growth_temp" {
                        normalize_temperature(part)
                    } else {
                        normalize(part)
                    };
                    if key.is_empty() || key == "none" {
                        continue;
                    }
                    let col = g
                        .values
                        .iter()
                        .position(|v| *v == key)
                        .or_else(|| g.values.iter().position(|v| *v == "other"))
                        .ok_or_else(|| Error::UnmappedMetadata {
                            field: g.field.to_owned(),
                            value: raw.clone(),
                        })?;
                    row[offset + col] = 1;
                }
            }
            offset += g.values.len();
        }
        rows.push(row);
    }
    Ok(OneHotTable {
        columns: ONE_HOT_COLUMNS.to_vec(),
        sequence_ids: records.iter().map(|r| r.sequence_id.clone()).collect(),
        rows,
    })
}
