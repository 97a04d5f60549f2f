//! Semantic vectors, individuals, and the semantic variation operators.
//!
//! Offspring never materialize syntax trees: every operator works directly on
//! the parents' semantics and records how the child was made in a [`Lineage`]
//! value. The theoretical node count of the virtual expression is tracked
//! alongside, so size reporting needs no tree reconstruction.

use thiserror::Error;

use crate::exprtree::saturate;
use crate::regression::{fit, LinearSystem, RegressionConfig, RegressionError};

#[derive(Debug, Error, PartialEq)]
pub enum SemopsError {
    #[error("semantic vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("index set is empty")]
    EmptyIndexSet,
    #[error("mutation step must be non-negative, got {0}")]
    NegativeStep(f64),
    #[error(transparent)]
    Regression(#[from] RegressionError),
}

/// The outputs of a program over every dataset case, train and test alike.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticVector {
    values: Vec<f64>,
}

impl SemanticVector {
    pub fn new(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndividualId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeId(pub u64);

/// Monotone id source; each run owns one for individuals and one for trees.
#[derive(Debug, Default, Clone)]
pub struct IdGen {
    next: u64,
}

impl IdGen {
    pub fn new() -> Self {
        Self::default()
    }

    fn bump(&mut self) -> u64 {
        let n = self.next;
        self.next += 1;
        n
    }

    pub fn individual(&mut self) -> IndividualId {
        IndividualId(self.bump())
    }

    pub fn tree(&mut self) -> TreeId {
        TreeId(self.bump())
    }
}

/// Bounded semantics of a random tree drawn by an operator, together with the
/// tree's identity and node count (the tree itself is discarded).
#[derive(Debug, Clone)]
pub struct RandomTreeSemantics {
    pub id: TreeId,
    pub node_count: u64,
    pub values: SemanticVector,
}

impl RandomTreeSemantics {
    pub fn new(id: TreeId, node_count: u64, values: SemanticVector) -> Self {
        Self {
            id,
            node_count,
            values,
        }
    }
}

/// How an individual was produced. Arities are fixed by construction:
/// crossover has two parents and one random tree, the mutations one parent
/// and two random trees, the basis-function step and plain copies one parent
/// and no trees.
#[derive(Debug, Clone, PartialEq)]
pub enum Lineage {
    InitialTree {
        tree: TreeId,
    },
    Crossover {
        parents: [IndividualId; 2],
        random_tree: TreeId,
    },
    Mutation {
        parent: IndividualId,
        random_trees: [TreeId; 2],
        ms: f64,
    },
    MutationLs {
        parent: IndividualId,
        random_trees: [TreeId; 2],
        /// alpha0 (intercept), alpha1 (parent), alpha2 (tree difference)
        coefficients: [f64; 3],
    },
    RegLs {
        parent: IndividualId,
        /// beta1 (tree), beta2 (constant), beta3 (negative part), beta4 (positive part)
        coefficients: [f64; 4],
    },
    Copy {
        parent: IndividualId,
    },
}

impl Lineage {
    pub fn parent_ids(&self) -> Vec<IndividualId> {
        match self {
            Lineage::InitialTree { .. } => vec![],
            Lineage::Crossover { parents, .. } => parents.to_vec(),
            Lineage::Mutation { parent, .. }
            | Lineage::MutationLs { parent, .. }
            | Lineage::RegLs { parent, .. }
            | Lineage::Copy { parent } => vec![*parent],
        }
    }

    pub fn random_tree_ids(&self) -> Vec<TreeId> {
        match self {
            Lineage::InitialTree { tree } => vec![*tree],
            Lineage::Crossover { random_tree, .. } => vec![*random_tree],
            Lineage::Mutation { random_trees, .. } | Lineage::MutationLs { random_trees, .. } => {
                random_trees.to_vec()
            }
            Lineage::RegLs { .. } | Lineage::Copy { .. } => vec![],
        }
    }
}

/// Targets plus the train/test index sets an individual's cached fitness
/// refers to.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext<'a> {
    pub targets: &'a [f64],
    pub train: &'a [usize],
    pub test: &'a [usize],
}

impl<'a> EvalContext<'a> {
    pub fn new(targets: &'a [f64], train: &'a [usize], test: &'a [usize]) -> Self {
        Self {
            targets,
            train,
            test,
        }
    }
}

/// Semantics plus lineage plus cached train/test RMSE. The cache is computed
/// once at construction and the value is immutable afterwards, so it can
/// never go stale.
#[derive(Debug, Clone)]
pub struct Individual {
    id: IndividualId,
    semantics: SemanticVector,
    lineage: Lineage,
    size: u64,
    train_fitness: f64,
    test_fitness: f64,
}

impl Individual {
    pub fn new(
        id: IndividualId,
        semantics: SemanticVector,
        lineage: Lineage,
        size: u64,
        ctx: &EvalContext,
    ) -> Result<Self, SemopsError> {
        let train_fitness = rmse(&semantics, ctx.targets, ctx.train)?;
        let test_fitness = rmse(&semantics, ctx.targets, ctx.test)?;
        Ok(Self {
            id,
            semantics,
            lineage,
            size,
            train_fitness,
            test_fitness,
        })
    }

    pub fn id(&self) -> IndividualId {
        self.id
    }

    pub fn semantics(&self) -> &SemanticVector {
        &self.semantics
    }

    pub fn lineage(&self) -> &Lineage {
        &self.lineage
    }

    /// Theoretical node count of the expression this individual denotes.
    /// Grows exponentially with the generation count and saturates at
    /// `u64::MAX`.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn train_fitness(&self) -> f64 {
        self.train_fitness
    }

    pub fn test_fitness(&self) -> f64 {
        self.test_fitness
    }
}

/// Saturating sum for the theoretical size bookkeeping: the virtual
/// expressions grow exponentially across generations (that is why offspring
/// are never materialized), so sizes cap at `u64::MAX` instead of wrapping.
fn theoretical_size(terms: &[u64]) -> u64 {
    terms.iter().fold(0u64, |acc, &t| acc.saturating_add(t))
}

/// Root mean squared error of `semantics` against `targets` over `indices`.
pub fn rmse(
    semantics: &SemanticVector,
    targets: &[f64],
    indices: &[usize],
) -> Result<f64, SemopsError> {
    if indices.is_empty() {
        return Err(SemopsError::EmptyIndexSet);
    }
    let values = semantics.values();
    let sum: f64 = indices
        .iter()
        .map(|&i| {
            let d = values[i] - targets[i];
            d * d
        })
        .sum();
    Ok((sum / indices.len() as f64).sqrt())
}

fn check_len(a: usize, b: usize) -> Result<(), SemopsError> {
    if a != b {
        return Err(SemopsError::LengthMismatch(a, b));
    }
    Ok(())
}

/// Pulls `value` toward `anchor` one ulp at a time until the measured
/// distance fits inside `radius`. Boundary rounding in `anchor + radius`-style
/// arithmetic can land an ulp outside the ball; this restores the contract.
fn pull_into_ball(mut value: f64, anchor: f64, radius: f64) -> f64 {
    while (value - anchor).abs() > radius {
        value = if value > anchor {
            value.next_down()
        } else {
            value.next_up()
        };
    }
    value
}

/// Geometric semantic crossover: the child is the elementwise convex
/// combination of the parents weighted by the bounded random tree, so each
/// entry lies between the parents' entries. The interval containment is the
/// operator's contract, so entries are clamped into the parents' hull to keep
/// rounding from leaking outside it.
pub fn gsc(
    p1: &Individual,
    p2: &Individual,
    tr: &RandomTreeSemantics,
    ctx: &EvalContext,
    ids: &mut IdGen,
) -> Result<Individual, SemopsError> {
    check_len(p1.semantics.len(), p2.semantics.len())?;
    check_len(p1.semantics.len(), tr.values.len())?;
    let values: Vec<f64> = p1
        .semantics
        .values()
        .iter()
        .zip(p2.semantics.values())
        .zip(tr.values.values())
        .map(|((&a, &b), &t)| (a * t + (1.0 - t) * b).clamp(a.min(b), a.max(b)))
        .collect();
    let lineage = Lineage::Crossover {
        parents: [p1.id, p2.id],
        random_tree: tr.id,
    };
    let size = theoretical_size(&[p1.size, p2.size, 2 * tr.node_count, 5]);
    Individual::new(ids.individual(), SemanticVector::new(values), lineage, size, ctx)
}

/// Geometric semantic mutation: perturbs the parent by `ms` times the
/// difference of two bounded random trees, so the child stays within an
/// `ms`-ball of the parent. The ball containment is the operator's contract
/// and is enforced against boundary rounding.
pub fn gsm(
    p: &Individual,
    r1: &RandomTreeSemantics,
    r2: &RandomTreeSemantics,
    ms: f64,
    ctx: &EvalContext,
    ids: &mut IdGen,
) -> Result<Individual, SemopsError> {
    if ms < 0.0 {
        return Err(SemopsError::NegativeStep(ms));
    }
    check_len(p.semantics.len(), r1.values.len())?;
    check_len(p.semantics.len(), r2.values.len())?;
    let values: Vec<f64> = p
        .semantics
        .values()
        .iter()
        .zip(r1.values.values())
        .zip(r2.values.values())
        .map(|((&a, &x), &y)| pull_into_ball(saturate(a + ms * (x - y)), a, ms))
        .collect();
    let lineage = Lineage::Mutation {
        parent: p.id,
        random_trees: [r1.id, r2.id],
        ms,
    };
    let size = theoretical_size(&[p.size, r1.node_count, r2.node_count, 4]);
    Individual::new(ids.individual(), SemanticVector::new(values), lineage, size, ctx)
}

/// Mutation with a local-search step: fits `alpha0 + alpha1 * parent +
/// alpha2 * (r1 - r2)` to the targets over `fit_indices`, then applies the
/// fitted map to the full semantic vector.
pub fn gsm_ls(
    p: &Individual,
    r1: &RandomTreeSemantics,
    r2: &RandomTreeSemantics,
    fit_indices: &[usize],
    reg: &RegressionConfig,
    ctx: &EvalContext,
    ids: &mut IdGen,
) -> Result<Individual, SemopsError> {
    if fit_indices.is_empty() {
        return Err(SemopsError::EmptyIndexSet);
    }
    check_len(p.semantics.len(), r1.values.len())?;
    check_len(p.semantics.len(), r2.values.len())?;
    let parent = p.semantics.values();
    let diff: Vec<f64> = r1
        .values
        .values()
        .iter()
        .zip(r2.values.values())
        .map(|(&a, &b)| a - b)
        .collect();

    let m = fit_indices.len();
    let mut ones = Vec::with_capacity(m);
    let mut col_p = Vec::with_capacity(m);
    let mut col_d = Vec::with_capacity(m);
    let mut response = Vec::with_capacity(m);
    for &i in fit_indices {
        ones.push(1.0);
        col_p.push(parent[i]);
        col_d.push(diff[i]);
        response.push(ctx.targets[i]);
    }
    let system = LinearSystem::new(vec![ones, col_p, col_d], response)?;
    let alpha = fit(&system, reg)?;

    let values: Vec<f64> = parent
        .iter()
        .zip(&diff)
        .map(|(&pv, &dv)| saturate(alpha[0] + alpha[1] * pv + alpha[2] * dv))
        .collect();
    let lineage = Lineage::MutationLs {
        parent: p.id,
        random_trees: [r1.id, r2.id],
        coefficients: [alpha[0], alpha[1], alpha[2]],
    };
    // four more nodes than plain mutation for the fitted terms
    let size = theoretical_size(&[p.size, r1.node_count, r2.node_count, 8]);
    Individual::new(ids.individual(), SemanticVector::new(values), lineage, size, ctx)
}

/// Basis-function local search: fits `beta1 * T + beta2 + beta3 * min(0, T) +
/// beta4 * max(0, T)` to the targets over `fit_indices`, then applies the
/// fitted map to the full semantic vector. The basis is structurally
/// collinear (the tree equals the sum of its negative and positive parts), so
/// the solver's minimum-norm rule is load-bearing here.
pub fn reg_ls(
    p: &Individual,
    fit_indices: &[usize],
    reg: &RegressionConfig,
    ctx: &EvalContext,
    ids: &mut IdGen,
) -> Result<Individual, SemopsError> {
    if fit_indices.is_empty() {
        return Err(SemopsError::EmptyIndexSet);
    }
    let parent = p.semantics.values();

    let m = fit_indices.len();
    let mut col_t = Vec::with_capacity(m);
    let mut ones = Vec::with_capacity(m);
    let mut col_neg = Vec::with_capacity(m);
    let mut col_pos = Vec::with_capacity(m);
    let mut response = Vec::with_capacity(m);
    for &i in fit_indices {
        let v = parent[i];
        col_t.push(v);
        ones.push(1.0);
        col_neg.push(v.min(0.0));
        col_pos.push(v.max(0.0));
        response.push(ctx.targets[i]);
    }
    let system = LinearSystem::new(vec![col_t, ones, col_neg, col_pos], response)?;
    let beta = fit(&system, reg)?;

    let values: Vec<f64> = parent
        .iter()
        .map(|&v| saturate(beta[0] * v + beta[1] + beta[2] * v.min(0.0) + beta[3] * v.max(0.0)))
        .collect();
    let lineage = Lineage::RegLs {
        parent: p.id,
        coefficients: [beta[0], beta[1], beta[2], beta[3]],
    };
    // expanded expression: three sums, four coefficient products, the
    // clipped copies of the tree, and two zero constants
    let size = theoretical_size(&[p.size, p.size, p.size, 14]);
    Individual::new(ids.individual(), SemanticVector::new(values), lineage, size, ctx)
}

/// A fresh individual with the parent's semantics and a `Copy` lineage.
pub fn copy_of(
    p: &Individual,
    ctx: &EvalContext,
    ids: &mut IdGen,
) -> Result<Individual, SemopsError> {
    Individual::new(
        ids.individual(),
        p.semantics.clone(),
        Lineage::Copy { parent: p.id },
        p.size,
        ctx,
    )
}
