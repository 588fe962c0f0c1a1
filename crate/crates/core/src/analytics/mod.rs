//! Distance matrices, group statistics and lifespan features.

mod lifespans;
mod matrix;
mod wilcoxon;

pub use lifespans::{lifespans_to_csv, top_k_lifespans, LifespanFeatures};
pub use matrix::{
    inter_roi_matrix, inter_subject_matrix, pairwise_matrix, DistanceMatrix, FiltrationKind,
    MatrixKind, MatrixMeta,
};
pub use wilcoxon::{
    mid_ranks, rank_sum_counts, wilcoxon_rank_sum, wilcoxon_rank_sum_with, Alternative,
    TestMethod, TestResult, EXACT_MAX_TOTAL,
};

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// How group samples are drawn from a distance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extraction {
    /// Upper triangle of each group's own block.
    #[default]
    WithinBlocks,
}

/// The two samples compared by [`group_distance_test`].
pub fn group_samples(
    matrix: &DistanceMatrix,
    groups: &BTreeMap<String, String>,
    a: &str,
    b: &str,
    extraction: Extraction,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let Extraction::WithinBlocks = extraction;
    let block = |label: &str| -> Result<Vec<f64>> {
        let mut members = Vec::new();
        for (subject, g) in groups {
            if g == label {
                members.push(matrix.index_of(subject).ok_or_else(|| {
                    Error::InvalidArgument(format!("subject {subject:?} of group {label:?} is not in the matrix"))
                })?);
            }
        }
        if members.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "group {label:?} has {} member(s), need at least 2",
                members.len()
            )));
        }
        members.sort_unstable();
        let mut out = Vec::with_capacity(members.len() * (members.len() - 1) / 2);
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                out.push(matrix.get(i, j));
            }
        }
        Ok(out)
    };
    Ok((block(a)?, block(b)?))
}

/// Wilcoxon rank-sum test between the within-group distance blocks of `a` and `b`.
pub fn group_distance_test(
    matrix: &DistanceMatrix,
    groups: &BTreeMap<String, String>,
    a: &str,
    b: &str,
    extraction: Extraction,
) -> Result<TestResult> {
    let (x, y) = group_samples(matrix, groups, a, b, extraction)?;
    wilcoxon_rank_sum(&x, &y, Alternative::TwoSided)
}
