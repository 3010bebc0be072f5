//! Summary statistics: Spearman correlation, geometric means, decile groups.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::csv_write_error;
use crate::error::{Error, Result};

/// Average (fractional) ranks, 1-based. Tied values share the mean of the
/// positions they span.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
///
/// Returns `Ok(None)` when either input has zero rank variance.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument(
            "spearman needs at least two observations".into(),
        ));
    }
    Ok(pearson(&fractional_ranks(x), &fractional_ranks(y)))
}

/// `exp(mean(ln v))`, evaluated in base 2 so powers of two stay exact.
pub fn geometric_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("geometric mean of nothing".into()));
    }
    if let Some(v) = values.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "geometric mean requires positive values, got {v}"
        )));
    }
    let mean_log = values.iter().map(|v| v.log2()).sum::<f64>() / values.len() as f64;
    Ok(mean_log.exp2())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summary {
    #[default]
    Arithmetic,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecileGroup {
    /// 1 = highest-scoring tenth.
    pub decile: usize,
    pub members: Vec<String>,
    /// `None` for an empty group.
    pub summary: Option<f64>,
}

/// Sorts named scores descending and cuts them into ten contiguous groups.
///
/// Group sizes differ by at most one; when the count is not a multiple of
/// ten, the leading (higher-scoring) groups take the extra members. Equal
/// scores keep their input order.
pub fn decile_groups(scores: &[(String, f64)], summary: Summary) -> Result<Vec<DecileGroup>> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("no scores to group".into()));
    }
    let mut sorted: Vec<&(String, f64)> = scores.iter().collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1));
    let base = sorted.len() / 10;
    let extra = sorted.len() % 10;
    let mut groups = Vec::with_capacity(10);
    let mut offset = 0;
    for d in 0..10 {
        let size = base + usize::from(d < extra);
        let slice = &sorted[offset..offset + size];
        offset += size;
        let values: Vec<f64> = slice.iter().map(|(_, v)| *v).collect();
        let summary = if values.is_empty() {
            None
        } else {
            Some(match summary {
                Summary::Arithmetic => values.iter().sum::<f64>() / values.len() as f64,
                Summary::Geometric => geometric_mean(&values)?,
            })
        };
        groups.push(DecileGroup {
            decile: d + 1,
            members: slice.iter().map(|(n, _)| n.clone()).collect(),
            summary,
        });
    }
    Ok(groups)
}

/// `decile,size,summary,members` with members joined by `;`.
pub fn write_deciles_csv<W: Write>(groups: &[DecileGroup], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["decile", "size", "summary", "members"])
        .map_err(csv_write_error)?;
    for g in groups {
        wtr.write_record([
            g.decile.to_string(),
            g.members.len().to_string(),
            g.summary.map(|v| v.to_string()).unwrap_or_default(),
            g.members.join(";"),
        ])
        .map_err(csv_write_error)?;
    }
    wtr.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}
