use std::collections::{HashMap, HashSet};
use std::io::Write;

use indexmap::IndexMap;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::csv_write_error;
use crate::error::{Error, Result};

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";

/// Seeded one-to-one replacement of ids by random lowercase alphanumeric
/// tokens of fixed length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObfuscationMap {
    forward: IndexMap<String, String>,
    inverse: HashMap<String, String>,
}

impl ObfuscationMap {
    pub fn token(&self, id: &str) -> Option<&str> {
        self.forward.get(id).map(String::as_str)
    }

    pub fn original(&self, token: &str) -> Option<&str> {
        self.inverse.get(token).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.forward.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    /// `original_id,obfuscated_id`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["original_id", "obfuscated_id"])
            .map_err(csv_write_error)?;
        for (a, b) in self.iter() {
            wtr.write_record([a, b]).map_err(csv_write_error)?;
        }
        wtr.flush().map_err(|e| Error::io("<writer>", e))?;
        Ok(())
    }
}

/// Draws a token per id in input order, redrawing on collision.
pub fn obfuscate_ids<S: AsRef<str>>(ids: &[S], seed: u64, length: usize) -> Result<ObfuscationMap> {
    let capacity = (ALPHABET.len() as u128)
        .checked_pow(length as u32)
        .unwrap_or(u128::MAX);
    if (ids.len() as u128) > capacity {
        return Err(Error::InvalidArgument(format!(
            "{} ids cannot be mapped to distinct tokens of length {length}",
            ids.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut forward = IndexMap::with_capacity(ids.len());
    let mut used = HashSet::with_capacity(ids.len());
    for id in ids {
        let id = id.as_ref();
        if forward.contains_key(id) {
            return Err(Error::Duplicate {
                kind: "id",
                id: id.to_owned(),
            });
        }
        let token = loop {
            let t: String = (0..length)
                .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
                .collect();
            if used.insert(t.clone()) {
                break t;
            }
        };
        forward.insert(id.to_owned(), token);
    }
    let inverse = forward
        .iter()
        .map(|(a, b)| (b.clone(), a.clone()))
        .collect();
    Ok(ObfuscationMap { forward, inverse })
}
