//! Independent oracles for the acceptance suite.
//!
//! These deliberately take different computational routes from the library:
//! least squares goes through a one-sided Jacobi SVD that orthogonalizes the
//! design columns directly (the library solves the k x k normal equations),
//! and the Mann-Whitney oracle enumerates every labeling by brute force (the
//! library counts rank sums with a dynamic program or approximates).

/// Minimum-norm least-squares coefficients via one-sided Jacobi SVD of the
/// full m x k design: plane rotations orthogonalize the columns, the Gram
/// matrix is never formed. Directions with singular value below 1e-9 of the
/// largest are treated as null.
pub fn svd_least_squares(columns: &[Vec<f64>], response: &[f64]) -> Vec<f64> {
    let k = columns.len();
    let mut w: Vec<Vec<f64>> = columns.to_vec(); // rotated in place
    let mut v = vec![vec![0.0; k]; k];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    for _sweep in 0..100 {
        let mut rotated = false;
        for i in 0..k {
            for j in (i + 1)..k {
                let g = dot(&w[i], &w[j]);
                if g == 0.0 {
                    continue;
                }
                let a = dot(&w[i], &w[i]);
                let b = dot(&w[j], &w[j]);
                if g.abs() <= f64::EPSILON * (a * b).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (2.0 * g);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = c * t;
                let (left, right) = w.split_at_mut(j);
                for (wi, wj) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let x = *wi;
                    let y = *wj;
                    *wi = c * x - s * y;
                    *wj = s * x + c * y;
                }
                for row in v.iter_mut() {
                    let vi = row[i];
                    let vj = row[j];
                    row[i] = c * vi - s * vj;
                    row[j] = s * vi + c * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // w columns are now orthogonal with norms sigma_i; the minimum-norm
    // solution is sum over significant directions of v_i (w_i . y) / sigma_i^2
    let norms_sq: Vec<f64> = w.iter().map(|col| dot(col, col)).collect();
    let max_norm_sq = norms_sq.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff_sq = max_norm_sq * 1e-18; // (1e-9 relative on singular values)^2
    let mut beta = vec![0.0; k];
    for i in 0..k {
        if norms_sq[i] <= cutoff_sq || norms_sq[i] == 0.0 {
            continue;
        }
        let coef = dot(&w[i], response) / norms_sq[i];
        for (br, row) in beta.iter_mut().zip(v.iter()) {
            *br += row[i] * coef;
        }
    }
    beta
}

/// Linear combination of full-length columns under the oracle coefficients.
pub fn linear_combination(columns: &[Vec<f64>], beta: &[f64]) -> Vec<f64> {
    let rows = columns[0].len();
    let mut out = vec![0.0; rows];
    for (col, &b) in columns.iter().zip(beta) {
        for (o, &v) in out.iter_mut().zip(col) {
            *o += b * v;
        }
    }
    out
}

/// Exact one-tailed Mann-Whitney p-value for "a stochastically smaller than
/// b" by enumerating all C(n, |a|) labelings of the pooled sample. Feasible
/// for |a| + |b| <= 20 or so.
pub fn exact_mann_whitney_less(a: &[f64], b: &[f64]) -> f64 {
    let n1 = a.len();
    let n = a.len() + b.len();
    assert!(n <= 24, "exact enumeration explodes beyond small samples");

    let pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    // average ranks of the pooled multiset, aligned with pooled positions
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| pooled[x].total_cmp(&pooled[y]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &pos in &order[i..j] {
            ranks[pos] = rank;
        }
        i = j;
    }

    let offset = (n1 * (n1 + 1)) as f64 / 2.0;
    let u_observed: f64 = ranks[..n1].iter().sum::<f64>() - offset;

    let mut at_most = 0u64;
    let mut total = 0u64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        total += 1;
        let mut rank_sum = 0.0;
        for (pos, &r) in ranks.iter().enumerate() {
            if mask & (1 << pos) != 0 {
                rank_sum += r;
            }
        }
        // rank sums are multiples of 1/2, so the comparison is exact
        if rank_sum - offset <= u_observed {
            at_most += 1;
        }
    }
    at_most as f64 / total as f64
}
