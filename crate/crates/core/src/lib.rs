//! Metrics and baselines for attributing engineered DNA sequences to the lab
//! that designed them.
//!
//! Predictors are scored from a probability matrix (sequences x labs) and a
//! ground-truth label map. See [`report::build_report`] for the full pipeline.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod baseline;
pub mod calibration;
pub mod classification;
pub mod data;
pub mod ensemble;
mod error;
pub mod prep;
pub mod rank;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
