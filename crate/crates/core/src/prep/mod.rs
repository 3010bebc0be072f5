//! Dataset preparation: small-lab pooling, lineage grouping, the constrained
//! train/leaderboard/holdout split, id obfuscation and one-hot metadata.

mod lineage;
mod metadata;
mod obfuscate;
mod pooling;
mod split;

pub use lineage::lineage_components;
pub use metadata::{encode_metadata, OneHotTable, ONE_HOT_COLUMNS};
pub use obfuscate::{obfuscate_ids, ObfuscationMap};
pub use pooling::{pool_small_labs, CategoryPooling, DEFAULT_POOL_THRESHOLD, UNKNOWN_ENGINEERED};
pub use split::{split_dataset, Split, SplitAssignment, SplitConfig, DEFAULT_FRACTIONS};
