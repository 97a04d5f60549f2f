//! Result aggregation: one-tailed Mann-Whitney U tests with Bonferroni
//! correction, the pairwise significance matrix, and boxplot-style sample
//! summaries.

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("need at least two algorithms to compare, got {0}")]
    TooFewAlgorithms(usize),
}

/// Pooled samples up to this size take the exact route; the normal
/// approximation is known to drift past acceptable error at the extreme tails
/// of very small samples, while at experiment scale (30-100 runs per
/// algorithm) it is indistinguishable from exact and far cheaper.
const EXACT_POOLED_LIMIT: usize = 20;

/// One-tailed Mann-Whitney U test for the alternative "a is stochastically
/// smaller than b" (with RMSE samples: a has the better fitness).
///
/// Small pooled samples are scored exactly by counting rank-sum subsets;
/// larger ones use the normal approximation with average ranks, tie-corrected
/// variance, and a continuity correction. A degenerate comparison where every
/// pooled value ties returns 1.0: no evidence of a difference.
pub fn mann_whitney_one_tailed(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n1 = a.len() as f64;
    let n2 = b.len() as f64;
    let n = n1 + n2;

    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    // average ranks with tie groups, doubled so they stay integral;
    // accumulate the rank sum of `a` and the tie-correction term sum(t^3 - t)
    let mut doubled_ranks: Vec<u64> = Vec::with_capacity(pooled.len());
    let mut doubled_rank_sum_a: u64 = 0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let count = (j - i) as f64;
        let doubled_rank = (i + j + 1) as u64; // twice the average 1-based rank
        for &(_, from_a) in &pooled[i..j] {
            doubled_ranks.push(doubled_rank);
            if from_a {
                doubled_rank_sum_a += doubled_rank;
            }
        }
        tie_term += count * count * count - count;
        i = j;
    }

    if pooled.len() <= EXACT_POOLED_LIMIT {
        return Ok(exact_tail(&doubled_ranks, a.len(), doubled_rank_sum_a));
    }

    let rank_sum_a = doubled_rank_sum_a as f64 / 2.0;
    let u_a = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let mean = n1 * n2 / 2.0;
    let variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if variance <= 0.0 {
        return Ok(1.0);
    }
    let z = (u_a + 0.5 - mean) / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.cdf(z))
}

/// Exact P(rank sum of group a <= observed) over all equally likely
/// labelings, via a subset-counting dynamic program on the doubled ranks.
fn exact_tail(doubled_ranks: &[u64], n1: usize, observed: u64) -> f64 {
    let total: u64 = doubled_ranks.iter().sum();
    // ways[k][s] = number of k-subsets of the processed ranks summing to s
    let mut ways = vec![vec![0u64; total as usize + 1]; n1 + 1];
    ways[0][0] = 1;
    for &r in doubled_ranks {
        for k in (0..n1).rev() {
            for s in (0..=(total - r) as usize).rev() {
                if ways[k][s] > 0 {
                    ways[k + 1][s + r as usize] += ways[k][s];
                }
            }
        }
    }
    let labelings: u64 = ways[n1].iter().sum();
    let at_most: u64 = ways[n1][..=observed as usize].iter().sum();
    at_most as f64 / labelings as f64
}

/// Bonferroni adjustment: `min(1, m p)` for `m` comparisons.
pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m as f64).min(1.0)
}

/// Pairwise one-tailed comparison matrix. Entry `(i, j)` is the Bonferroni-
/// adjusted p-value for "algorithm i produces smaller values than algorithm
/// j"; the diagonal is undefined. The correction family is the number of
/// off-diagonal cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceMatrix {
    pub labels: Vec<String>,
    pub p_values: Vec<Vec<Option<f64>>>,
}

pub fn significance_matrix(
    labels: &[String],
    samples: &[Vec<f64>],
) -> Result<SignificanceMatrix, StatsError> {
    let k = samples.len();
    if k < 2 {
        return Err(StatsError::TooFewAlgorithms(k));
    }
    assert_eq!(labels.len(), k, "one label per sample");
    let m = k * (k - 1);
    let mut p_values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let raw = mann_whitney_one_tailed(&samples[i], &samples[j])?;
            p_values[i][j] = Some(bonferroni(raw, m));
        }
    }
    Ok(SignificanceMatrix {
        labels: labels.to_vec(),
        p_values,
    })
}

/// Boxplot-style five-number summary plus the values outside the 1.5 IQR
/// fences. Quartiles interpolate linearly between order statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub outliers: Vec<f64>,
}

pub fn summarize(sample: &[f64]) -> Result<SampleSummary, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);

    let quantile = |p: f64| -> f64 {
        let h = (sorted.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let frac = h - lo as f64;
        if lo + 1 < sorted.len() {
            sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
        } else {
            sorted[lo]
        }
    };

    let q1 = quantile(0.25);
    let median = quantile(0.5);
    let q3 = quantile(0.75);
    let iqr = q3 - q1;
    let low_fence = q1 - 1.5 * iqr;
    let high_fence = q3 + 1.5 * iqr;
    let outliers: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|&v| v < low_fence || v > high_fence)
        .collect();

    Ok(SampleSummary {
        count: sorted.len(),
        min: sorted[0],
        q1,
        median,
        q3,
        max: *sorted.last().expect("non-empty"),
        outliers,
    })
}
