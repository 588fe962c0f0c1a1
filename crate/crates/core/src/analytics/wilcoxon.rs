//! Two-sided Wilcoxon rank-sum test.
//!
//! The statistic is the rank sum of the first sample, with mid-ranks for
//! ties. Small tie-free designs (`n1 + n2 <= 20`) get the exact null
//! distribution; everything else uses the normal approximation with tie and
//! continuity corrections.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest combined sample size that uses the exact distribution.
pub const EXACT_MAX_TOTAL: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// Rank sum of the first sample.
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
    pub method: TestMethod,
}

/// Mid-ranks (1-based) of `values`, plus the tie group sizes.
pub fn mid_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share rank (i+1 + j) / 2
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Number of size-`k` subsets of `{1..=n}` with each rank sum, indexed by sum.
pub fn rank_sum_counts(n: usize, k: usize) -> Vec<f64> {
    let max_sum = n * (n + 1) / 2;
    // counts[j][s]: subsets of size j with sum s
    let mut counts = vec![vec![0.0; max_sum + 1]; k + 1];
    counts[0][0] = 1.0;
    for r in 1..=n {
        for j in (1..=k.min(r)).rev() {
            for s in (r..=max_sum).rev() {
                counts[j][s] += counts[j - 1][s - r];
            }
        }
    }
    counts.swap_remove(k)
}

fn exact_two_sided(w: f64, n1: usize, n: usize) -> f64 {
    let counts = rank_sum_counts(n, n1);
    let total: f64 = counts.iter().sum();
    let w = w.round() as usize;
    let lower: f64 = counts[..=w].iter().sum();
    let upper: f64 = counts[w..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

fn normal_two_sided(w: f64, n1: usize, n2: usize, ties: &[usize]) -> f64 {
    let n = (n1 + n2) as f64;
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let mean = n1f * (n + 1.0) / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = n1f * n2f / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * normal.sf(z)).min(1.0)
}

/// Exact when tie-free with `n1 + n2 <= 20`, normal approximation otherwise.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64], alternative: Alternative) -> Result<TestResult> {
    let Alternative::TwoSided = alternative;
    let (_, ties, w) = prepare(x, y)?;
    let (n1, n2) = (x.len(), y.len());
    let (p_value, method) = if ties.is_empty() && n1 + n2 <= EXACT_MAX_TOTAL {
        (exact_two_sided(w, n1, n1 + n2), TestMethod::Exact)
    } else {
        (normal_two_sided(w, n1, n2, &ties), TestMethod::NormalApprox)
    };
    Ok(TestResult {
        statistic: w,
        p_value,
        n1,
        n2,
        method,
    })
}

/// The test with the method forced, for cross-checks.
pub fn wilcoxon_rank_sum_with(x: &[f64], y: &[f64], method: TestMethod) -> Result<TestResult> {
    let (_, ties, w) = prepare(x, y)?;
    let (n1, n2) = (x.len(), y.len());
    let p_value = match method {
        TestMethod::Exact if !ties.is_empty() => {
            return Err(Error::InvalidArgument("exact method requires tie-free samples".into()))
        }
        TestMethod::Exact => exact_two_sided(w, n1, n1 + n2),
        TestMethod::NormalApprox => normal_two_sided(w, n1, n2, &ties),
    };
    Ok(TestResult {
        statistic: w,
        p_value,
        n1,
        n2,
        method,
    })
}

fn prepare(x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<usize>, f64)> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InsufficientData("Wilcoxon test needs two non-empty samples".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("NaN in Wilcoxon sample".into()));
    }
    let joined: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = mid_ranks(&joined);
    let w = ranks[..x.len()].iter().sum();
    Ok((ranks, ties, w))
}
