//! Adaptive local search: validation-gated acceptance plus a cumulative
//! acceptance-rate probability schedule.
//!
//! A local-search step is fitted on the inner fit portion (x1) of the
//! training set and accepted only if it strictly improves RMSE on the
//! held-out portion (x2). The probability of even attempting a step is the
//! cumulative acceptance rate through the last completed generation, floored
//! at 0.01 so local search never disappears entirely.

use thiserror::Error;

use crate::dataset::InnerSplit;
use crate::semops::{rmse, Individual, SemopsError};

#[derive(Debug, Error, PartialEq)]
pub enum AdaptiveError {
    #[error("inner validation set (x2) is empty")]
    X2Empty,
    #[error(transparent)]
    Step(#[from] SemopsError),
}

/// Accepted/attempted local-search counters: cumulative through the last
/// completed generation, plus the running generation's tallies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenState {
    n_acc_cumulative: u64,
    n_total_cumulative: u64,
    n_acc_current: u64,
    n_current: u64,
}

/// Minimum probability of attempting a local-search step.
pub const P_MIN: f64 = 0.01;

impl GenState {
    pub fn new() -> Self {
        Self {
            n_acc_cumulative: 0,
            n_total_cumulative: 0,
            n_acc_current: 0,
            n_current: 0,
        }
    }

    pub fn accepted_cumulative(&self) -> u64 {
        self.n_acc_cumulative
    }

    pub fn total_cumulative(&self) -> u64 {
        self.n_total_cumulative
    }

    pub fn accepted_current(&self) -> u64 {
        self.n_acc_current
    }

    pub fn total_current(&self) -> u64 {
        self.n_current
    }

    /// Probability of attempting a local-search step this generation:
    /// `max(0.01, N_acc / N)`, or 1 while there is no history at all.
    pub fn ls_probability(&self) -> f64 {
        if self.n_total_cumulative == 0 {
            return 1.0;
        }
        let ratio = self.n_acc_cumulative as f64 / self.n_total_cumulative as f64;
        ratio.max(P_MIN)
    }

    /// Folds the running generation's counters into the cumulative totals and
    /// resets the running tallies.
    pub fn end_generation(&mut self) {
        self.n_acc_cumulative += self.n_acc_current;
        self.n_total_cumulative += self.n_current;
        self.n_acc_current = 0;
        self.n_current = 0;
    }

    fn record_attempt(&mut self, accepted: bool) {
        self.n_current += 1;
        if accepted {
            self.n_acc_current += 1;
        }
    }

    #[cfg(test)]
    fn with_counters(n_acc: u64, n_total: u64, acc_cur: u64, cur: u64) -> Self {
        Self {
            n_acc_cumulative: n_acc,
            n_total_cumulative: n_total,
            n_acc_current: acc_cur,
            n_current: cur,
        }
    }
}

impl Default for GenState {
    fn default() -> Self {
        Self::new()
    }
}

/// Fits a candidate on the inner fit set via `step` and keeps it only if its
/// RMSE on the held-out x2 strictly improves on the parent's; ties reject.
/// Either way the attempt counter advances.
pub fn attempt_local_search<F>(
    parent: &Individual,
    step: F,
    inner: &InnerSplit,
    targets: &[f64],
    state: &mut GenState,
) -> Result<Individual, AdaptiveError>
where
    F: FnOnce(&[usize]) -> Result<Individual, SemopsError>,
{
    if inner.x2.is_empty() {
        return Err(AdaptiveError::X2Empty);
    }
    let candidate = step(&inner.x1)?;
    let candidate_rmse = rmse(candidate.semantics(), targets, &inner.x2)?;
    let parent_rmse = rmse(parent.semantics(), targets, &inner.x2)?;
    if candidate_rmse < parent_rmse {
        state.record_attempt(true);
        Ok(candidate)
    } else {
        state.record_attempt(false);
        Ok(parent.clone())
    }
}
