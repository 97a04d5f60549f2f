//! Small dense least-squares and ridge solver.
//!
//! The local-search operators fit at most four coefficients at a time, so the
//! solver works on the k x k normal equations: build the Gram matrix, take its
//! eigendecomposition (cyclic Jacobi; k is tiny), and invert only the
//! directions that carry signal. Rank-deficient systems — the basis-function
//! step is structurally collinear — resolve to the minimum-norm solution.
//! Ridge shifts every eigenvalue by lambda, penalizing all coefficients
//! including the constant term.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegressionError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid regression configuration: {0}")]
    InvalidConfig(String),
    #[error("linear system entries must be finite")]
    NonFiniteEntry,
}

/// Eigenvalues below this fraction of the largest are treated as null
/// directions when solving unregularized least squares.
const RANK_REL_TOL: f64 = 1e-10;

/// Which regression the local-search operators run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegressionConfig {
    /// Minimum-norm ordinary least squares.
    Ols,
    /// L2-penalized least squares; the penalty applies to every coefficient.
    Ridge { lambda: f64 },
}

impl RegressionConfig {
    pub fn ols() -> Self {
        Self::Ols
    }

    pub fn ridge(lambda: f64) -> Result<Self, RegressionError> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(RegressionError::InvalidConfig(format!(
                "ridge lambda must be a positive finite number, got {lambda}"
            )));
        }
        Ok(Self::Ridge { lambda })
    }
}

/// A design matrix stored column-wise, plus the response vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    columns: Vec<Vec<f64>>,
    response: Vec<f64>,
}

impl LinearSystem {
    pub fn new(columns: Vec<Vec<f64>>, response: Vec<f64>) -> Result<Self, RegressionError> {
        if columns.is_empty() {
            return Err(RegressionError::DimensionMismatch(
                "need at least one column".into(),
            ));
        }
        if response.is_empty() {
            return Err(RegressionError::DimensionMismatch(
                "need at least one row".into(),
            ));
        }
        for (i, col) in columns.iter().enumerate() {
            if col.len() != response.len() {
                return Err(RegressionError::DimensionMismatch(format!(
                    "column {} has {} rows, response has {}",
                    i,
                    col.len(),
                    response.len()
                )));
            }
        }
        let finite = columns
            .iter()
            .flatten()
            .chain(response.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(RegressionError::NonFiniteEntry);
        }
        Ok(Self { columns, response })
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.response.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fits coefficients for `system` under `config`.
///
/// OLS returns the minimum-norm minimizer of the residual; ridge solves
/// `(X'X + lambda I) beta = X'y`.
pub fn fit(system: &LinearSystem, config: &RegressionConfig) -> Result<Vec<f64>, RegressionError> {
    if let RegressionConfig::Ridge { lambda } = config {
        if !lambda.is_finite() || *lambda <= 0.0 {
            return Err(RegressionError::InvalidConfig(format!(
                "ridge lambda must be a positive finite number, got {lambda}"
            )));
        }
    }
    let k = system.num_columns();
    let cols = system.columns();
    let mut gram = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for i in 0..k {
        for j in i..k {
            let g = dot(&cols[i], &cols[j]);
            gram[i][j] = g;
            gram[j][i] = g;
        }
        rhs[i] = dot(&cols[i], system.response());
    }

    let (eigvals, eigvecs) = symmetric_eigen(&gram);
    let max_eig = eigvals.iter().cloned().fold(0.0_f64, f64::max);

    let mut beta = vec![0.0; k];
    for e in 0..k {
        let coord: f64 = (0..k).map(|i| eigvecs[i][e] * rhs[i]).sum();
        let inv = match config {
            RegressionConfig::Ols => {
                if eigvals[e] > max_eig * RANK_REL_TOL {
                    1.0 / eigvals[e]
                } else {
                    0.0
                }
            }
            RegressionConfig::Ridge { lambda } => 1.0 / (eigvals[e].max(0.0) + lambda),
        };
        let scaled = coord * inv;
        for i in 0..k {
            beta[i] += eigvecs[i][e] * scaled;
        }
    }
    Ok(beta)
}

/// Elementwise linear combination of the columns.
pub fn predict(columns: &[Vec<f64>], coefficients: &[f64]) -> Result<Vec<f64>, RegressionError> {
    if columns.len() != coefficients.len() {
        return Err(RegressionError::DimensionMismatch(format!(
            "{} columns but {} coefficients",
            columns.len(),
            coefficients.len()
        )));
    }
    let rows = columns.first().map_or(0, |c| c.len());
    for (i, col) in columns.iter().enumerate() {
        if col.len() != rows {
            return Err(RegressionError::DimensionMismatch(format!(
                "column {} has {} rows, column 0 has {}",
                i,
                col.len(),
                rows
            )));
        }
    }
    let mut out = vec![0.0; rows];
    for (col, &coef) in columns.iter().zip(coefficients) {
        for (o, &v) in out.iter_mut().zip(col) {
            *o += coef * v;
        }
    }
    Ok(out)
}

/// Cyclic Jacobi eigendecomposition of a symmetric k x k matrix.
/// Returns eigenvalues and the matrix of eigenvectors (column e is the
/// eigenvector of eigenvalue e).
#[allow(clippy::needless_range_loop)] // row pairs are combined in place
fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; k]; k];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for p in 0..k {
            diag += a[p][p] * a[p][p];
            for q in (p + 1)..k {
                off += a[p][q] * a[p][q];
            }
        }
        if off == 0.0 || off <= diag * (f64::EPSILON * f64::EPSILON) {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / apq;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for j in 0..k {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for row in a.iter_mut() {
                    let aip = row[p];
                    let aiq = row[q];
                    row[p] = c * aip - s * aiq;
                    row[q] = s * aip + c * aiq;
                }
                for row in v.iter_mut() {
                    let vip = row[p];
                    let viq = row[q];
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }

    let eigvals: Vec<f64> = (0..k).map(|i| a[i][i]).collect();
    (eigvals, v)
}
