use serde::Serialize;

use super::{CategoryId, LabelMap, PredictionMatrix};

/// Maximum allowed |row sum - 1|.
pub const ROW_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowSumViolation {
    pub sequence_id: String,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutOfRange {
    pub sequence_id: String,
    pub category_id: CategoryId,
    pub value: f64,
}

/// All findings from checking a matrix against a label set. Nothing here is
/// fatal; `ok` is true iff every list is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub row_sum_violations: Vec<RowSumViolation>,
    /// Labelled sequences absent from the matrix.
    pub missing_from_matrix: Vec<String>,
    /// Matrix rows without a label.
    pub missing_from_labels: Vec<String>,
    /// Label categories that are not matrix columns.
    pub unknown_categories: Vec<CategoryId>,
    /// Negative, greater than one, or non-finite entries.
    pub out_of_range: Vec<OutOfRange>,
}

impl ValidationReport {
    pub fn findings(&self) -> usize {
        self.row_sum_violations.len()
            + self.missing_from_matrix.len()
            + self.missing_from_labels.len()
            + self.unknown_categories.len()
            + self.out_of_range.len()
    }

    /// One human-readable line per finding.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.findings());
        for v in &self.row_sum_violations {
            out.push(format!("row `{}` sums to {}", v.sequence_id, v.sum));
        }
        for id in &self.missing_from_matrix {
            out.push(format!("labelled sequence `{id}` missing from predictions"));
        }
        for id in &self.missing_from_labels {
            out.push(format!("predicted sequence `{id}` has no label"));
        }
        for c in &self.unknown_categories {
            out.push(format!("label category `{c}` is not a prediction column"));
        }
        for o in &self.out_of_range {
            out.push(format!(
                "value {} for (`{}`, `{}`) outside [0, 1]",
                o.value, o.sequence_id, o.category_id
            ));
        }
        out
    }
}

pub fn validate(matrix: &PredictionMatrix, labels: &LabelMap) -> ValidationReport {
    let mut row_sum_violations = Vec::new();
    let mut out_of_range = Vec::new();
    for (id, row) in matrix.sequence_ids().iter().zip(matrix.rows()) {
        let sum: f64 = row.iter().sum();
        if !((sum - 1.0).abs() <= ROW_SUM_TOLERANCE) {
            row_sum_violations.push(RowSumViolation {
                sequence_id: id.clone(),
                sum,
            });
        }
        for (cat, &v) in matrix.category_ids().iter().zip(row) {
            if !(0.0..=1.0).contains(&v) {
                out_of_range.push(OutOfRange {
                    sequence_id: id.clone(),
                    category_id: cat.clone(),
                    value: v,
                });
            }
        }
    }

    let missing_from_matrix = labels
        .iter()
        .filter(|(id, _)| matrix.sequence_index(id).is_none())
        .map(|(id, _)| id.to_owned())
        .collect();
    let missing_from_labels = matrix
        .sequence_ids()
        .iter()
        .filter(|id| labels.get(id).is_none())
        .cloned()
        .collect();
    let unknown_categories = labels
        .categories()
        .into_iter()
        .filter(|c| matrix.category_index(c).is_none())
        .cloned()
        .collect();

    let mut report = ValidationReport {
        ok: false,
        row_sum_violations,
        missing_from_matrix,
        missing_from_labels,
        unknown_categories,
        out_of_range,
    };
    report.ok = report.findings() == 0;
    report
}
