use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CategoryPooling;
use crate::data::{csv_write_error, CategoryId, SequenceRecord};
use crate::error::{Error, Result};

/// Target train/leaderboard/holdout fractions.
pub const DEFAULT_FRACTIONS: [f64; 3] = [0.770, 0.091, 0.139];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Leaderboard,
    Holdout,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Leaderboard, Split::Holdout];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Leaderboard => "leaderboard",
            Split::Holdout => "holdout",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub fractions: [f64; 3],
    /// Minimum holdout records per category.
    pub min_holdout: usize,
    pub seed: u64,
    /// Shorter sequences are kept out of leaderboard and holdout.
    pub min_sequence_length: usize,
}

impl SplitConfig {
    pub fn new(seed: u64) -> Self {
        SplitConfig {
            fractions: DEFAULT_FRACTIONS,
            min_holdout: 3,
            seed,
            min_sequence_length: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub assignments: IndexMap<String, Split>,
    /// Too-short sequences whose lineage landed outside train.
    pub dropped: Vec<String>,
    pub fractions_target: [f64; 3],
    pub seed: u64,
}

impl SplitAssignment {
    pub fn get(&self, sequence_id: &str) -> Option<Split> {
        self.assignments.get(sequence_id).copied()
    }

    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for s in self.assignments.values() {
            c[s.index()] += 1;
        }
        c
    }

    /// Share of assigned records in each split.
    pub fn realized_fractions(&self) -> [f64; 3] {
        let c = self.counts();
        let n = self.assignments.len() as f64;
        [c[0] as f64 / n, c[1] as f64 / n, c[2] as f64 / n]
    }

    /// `sequence_id,split`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["sequence_id", "split"])
            .map_err(csv_write_error)?;
        for (id, split) in &self.assignments {
            wtr.write_record([id.as_str(), split.as_str()])
                .map_err(csv_write_error)?;
        }
        wtr.flush().map_err(|e| Error::io("<writer>", e))?;
        Ok(())
    }
}

struct Component {
    members: Vec<usize>,
    /// Eligible (long enough) record count per category in this component.
    eligible: BTreeMap<usize, usize>,
}

/// Seeded three-way split keeping every lineage component inside one split
/// and guaranteeing `min_holdout` eligible records per category in holdout.
///
/// 1. Components are shuffled with `seed`.
/// 2. For each category (sorted by id), whole components containing it are
///    moved into holdout, in shuffled order, until the floor is met.
/// 3. Each remaining component goes to the split with the largest remaining
///    quota (`fraction * total - assigned`), ties resolved toward train.
/// 4. Constraints are re-checked on the result.
pub fn split_dataset(
    records: &[SequenceRecord],
    pooling: &CategoryPooling,
    components: &[Vec<String>],
    config: &SplitConfig,
) -> Result<SplitAssignment> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to split".into()));
    }
    let frac_total: f64 = config.fractions.iter().sum();
    if config.fractions.iter().any(|&f| !(f >= 0.0)) || (frac_total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "split fractions must be non-negative and sum to 1, got {:?}",
            config.fractions
        )));
    }

    let record_index: HashMap<&str, usize> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.sequence_id.as_str(), i))
        .collect();

    // category index per record
    let mut categories: Vec<&CategoryId> = pooling.mapping.values().collect();
    categories.sort();
    categories.dedup();
    let cat_index: HashMap<&CategoryId, usize> = categories
        .iter()
        .enumerate()
        .map(|(i, c)| (*c, i))
        .collect();
    let record_cat: Vec<usize> = records
        .iter()
        .map(|r| {
            let lab = r.lab_id.as_deref().ok_or_else(|| {
                Error::InvalidArgument(format!("record `{}` has no lab id", r.sequence_id))
            })?;
            let cat = pooling.category_of(lab).ok_or_else(|| {
                Error::InvalidArgument(format!("lab `{lab}` missing from pooling map"))
            })?;
            Ok(cat_index[cat])
        })
        .collect::<Result<_>>()?;
    let eligible = |i: usize| records[i].dna.len() >= config.min_sequence_length;

    let mut seen = vec![false; records.len()];
    let mut comps: Vec<Component> = Vec::with_capacity(components.len());
    for comp in components {
        let mut members = Vec::with_capacity(comp.len());
        let mut per_cat = BTreeMap::new();
        for id in comp {
            let i = *record_index.get(id.as_str()).ok_or_else(|| {
                Error::InvalidArgument(format!("component member `{id}` is not a record"))
            })?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Duplicate {
                    kind: "component member",
                    id: id.clone(),
                });
            }
            members.push(i);
            if eligible(i) {
                *per_cat.entry(record_cat[i]).or_insert(0) += 1;
            }
        }
        comps.push(Component {
            members,
            eligible: per_cat,
        });
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidArgument(format!(
            "record `{}` belongs to no lineage component",
            records[i].sequence_id
        )));
    }

    let mut available = vec![0usize; categories.len()];
    for c in &comps {
        for (&cat, &n) in &c.eligible {
            available[cat] += n;
        }
    }
    if let Some((cat, &n)) = available
        .iter()
        .enumerate()
        .find(|(_, &n)| n < config.min_holdout)
    {
        return Err(Error::InfeasibleCategory {
            category: categories[cat].to_string(),
            available: n,
            required: config.min_holdout,
        });
    }

    // 1. shuffle
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));

    let mut by_category: Vec<Vec<usize>> = vec![Vec::new(); categories.len()];
    for &ci in &order {
        for &cat in comps[ci].eligible.keys() {
            by_category[cat].push(ci);
        }
    }

    // 2. holdout floor
    let mut placement: Vec<Option<Split>> = vec![None; comps.len()];
    let mut holdout_eligible = vec![0usize; categories.len()];
    let mut assigned = [0usize; 3];
    for cat in 0..categories.len() {
        for &ci in &by_category[cat] {
            if holdout_eligible[cat] >= config.min_holdout {
                break;
            }
            if placement[ci].is_some() {
                continue;
            }
            placement[ci] = Some(Split::Holdout);
            assigned[Split::Holdout.index()] += comps[ci].members.len();
            for (&c, &n) in &comps[ci].eligible {
                holdout_eligible[c] += n;
            }
        }
    }

    // 3. quota fill
    let total = records.len() as f64;
    let targets = config.fractions.map(|f| f * total);
    for &ci in &order {
        if placement[ci].is_some() {
            continue;
        }
        let mut best = Split::Train;
        let mut best_room = f64::NEG_INFINITY;
        for s in Split::ALL {
            let room = targets[s.index()] - assigned[s.index()] as f64;
            if room > best_room {
                best = s;
                best_room = room;
            }
        }
        placement[ci] = Some(best);
        assigned[best.index()] += comps[ci].members.len();
    }

    let mut assignments = IndexMap::with_capacity(records.len());
    let mut dropped = Vec::new();
    let mut split_of = vec![Split::Train; records.len()];
    for (ci, comp) in comps.iter().enumerate() {
        let split = placement[ci].expect("every component placed");
        for &i in &comp.members {
            split_of[i] = split;
        }
    }
    for (i, r) in records.iter().enumerate() {
        let split = split_of[i];
        if split != Split::Train && !eligible(i) {
            log::info!(
                "dropping `{}` from {split}: sequence length {} below minimum {}",
                r.sequence_id,
                r.dna.len(),
                config.min_sequence_length
            );
            dropped.push(r.sequence_id.clone());
            continue;
        }
        assignments.insert(r.sequence_id.clone(), split);
    }

    // 4. verify
    let mut holdout_per_cat = vec![0usize; categories.len()];
    for (i, r) in records.iter().enumerate() {
        if assignments.get(&r.sequence_id) == Some(&Split::Holdout) {
            holdout_per_cat[record_cat[i]] += 1;
        }
    }
    if let Some(cat) = holdout_per_cat.iter().position(|&n| n < config.min_holdout) {
        return Err(Error::ConstraintViolation(format!(
            "category `{}` has {} holdout records",
            categories[cat], holdout_per_cat[cat]
        )));
    }
    for comp in &comps {
        let splits: Vec<Split> = comp
            .members
            .iter()
            .filter_map(|&i| assignments.get(&records[i].sequence_id).copied())
            .collect();
        if splits.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::ConstraintViolation(format!(
                "lineage containing `{}` spans several splits",
                records[comp.members[0]].sequence_id
            )));
        }
    }

    Ok(SplitAssignment {
        assignments,
        dropped,
        fractions_target: config.fractions,
        seed: config.seed,
    })
}
