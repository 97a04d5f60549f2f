//! Explicit expression trees over `{+, -, *, /}` and input variables.
//!
//! Trees only ever appear in two places: the initial population and the
//! random trees drawn inside the semantic operators. Everything downstream
//! works on semantics, so the tree type stays deliberately small.

use rand::Rng;
use thiserror::Error;

use crate::dataset::Dataset;
use crate::semops::SemanticVector;

/// Intermediate arithmetic is clamped to this magnitude so that squaring a
/// semantic entry (as the regression step does) can never overflow to
/// infinity.
pub const SATURATION_BOUND: f64 = 1e150;

/// Protected division returns 1 when the denominator magnitude falls below
/// this threshold.
pub const DIV_EPSILON: f64 = 1e-9;

/// Clamp a value into the saturation range shared by every semantic producer.
pub fn saturate(v: f64) -> f64 {
    v.clamp(-SATURATION_BOUND, SATURATION_BOUND)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("variable x{index} out of range for input of length {len}")]
    VariableOutOfRange { index: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone)]
pub enum Node {
    Var(usize),
    Op(BinaryOp, Box<Node>, Box<Node>),
}

#[derive(Debug, Clone)]
pub struct RandomTree {
    root: Node,
}

impl RandomTree {
    pub fn new(root: Node) -> Self {
        Self { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn node_count(&self) -> u64 {
        fn count(node: &Node) -> u64 {
            match node {
                Node::Var(_) => 1,
                Node::Op(_, l, r) => 1 + count(l) + count(r),
            }
        }
        count(&self.root)
    }

    /// Number of levels; a lone variable has depth 1.
    pub fn depth(&self) -> usize {
        fn depth(node: &Node) -> usize {
            match node {
                Node::Var(_) => 1,
                Node::Op(_, l, r) => 1 + depth(l).max(depth(r)),
            }
        }
        depth(&self.root)
    }

    /// Recursive arithmetic evaluation with protected division and saturating
    /// intermediates: the result is always finite for finite inputs.
    pub fn evaluate(&self, input: &[f64]) -> Result<f64, ExprError> {
        fn eval(node: &Node, input: &[f64]) -> Result<f64, ExprError> {
            match node {
                Node::Var(i) => input
                    .get(*i)
                    .copied()
                    .map(saturate)
                    .ok_or(ExprError::VariableOutOfRange {
                        index: *i,
                        len: input.len(),
                    }),
                Node::Op(op, l, r) => {
                    let a = eval(l, input)?;
                    let b = eval(r, input)?;
                    let v = match op {
                        BinaryOp::Add => a + b,
                        BinaryOp::Sub => a - b,
                        BinaryOp::Mul => a * b,
                        BinaryOp::Div => {
                            if b.abs() < DIV_EPSILON {
                                1.0
                            } else {
                                a / b
                            }
                        }
                    };
                    Ok(saturate(v))
                }
            }
        }
        eval(&self.root, input)
    }
}

/// Logistic map clamped into the open unit interval, so bounded semantics are
/// strictly inside (0, 1) even when the raw value saturates the exponential.
fn logistic(t: f64) -> f64 {
    let v = if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    };
    v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Evaluates `tree` over every case of `dataset`. With `bounded` the raw
/// output is passed through a logistic map, which is how the [0, 1] codomain
/// constraint on the operators' random trees is realized.
pub fn semantics_of_tree(
    tree: &RandomTree,
    dataset: &Dataset,
    bounded: bool,
) -> Result<SemanticVector, ExprError> {
    let mut values = Vec::with_capacity(dataset.len());
    for case in 0..dataset.len() {
        let raw = tree.evaluate(dataset.input(case))?;
        values.push(if bounded { logistic(raw) } else { raw });
    }
    Ok(SemanticVector::new(values))
}

/// Ramped half-and-half tree source: alternates the grow and full methods per
/// generated tree and draws the target depth uniformly from `1..=max_depth`.
/// The terminal set is the input variables only; grow picks function vs
/// terminal with equal probability at interior levels.
#[derive(Debug, Clone)]
pub struct RampedGenerator {
    num_vars: usize,
    max_depth: usize,
    next_full: bool,
}

impl RampedGenerator {
    pub fn new(num_vars: usize, max_depth: usize) -> Self {
        assert!(num_vars >= 1, "need at least one variable");
        assert!(max_depth >= 1, "need a positive depth limit");
        Self {
            num_vars,
            max_depth,
            next_full: false,
        }
    }

    pub fn generate<R: Rng>(&mut self, rng: &mut R) -> RandomTree {
        let target_depth = rng.random_range(1..=self.max_depth);
        let full = self.next_full;
        self.next_full = !full;
        let root = if full {
            self.full_node(rng, target_depth)
        } else {
            self.grow_node(rng, target_depth)
        };
        RandomTree::new(root)
    }

    fn random_var<R: Rng>(&self, rng: &mut R) -> Node {
        Node::Var(rng.random_range(0..self.num_vars))
    }

    fn random_op<R: Rng>(rng: &mut R) -> BinaryOp {
        match rng.random_range(0..4u8) {
            0 => BinaryOp::Add,
            1 => BinaryOp::Sub,
            2 => BinaryOp::Mul,
            _ => BinaryOp::Div,
        }
    }

    fn full_node<R: Rng>(&self, rng: &mut R, levels_left: usize) -> Node {
        if levels_left <= 1 {
            return self.random_var(rng);
        }
        let op = Self::random_op(rng);
        let l = self.full_node(rng, levels_left - 1);
        let r = self.full_node(rng, levels_left - 1);
        Node::Op(op, Box::new(l), Box::new(r))
    }

    fn grow_node<R: Rng>(&self, rng: &mut R, levels_left: usize) -> Node {
        if levels_left <= 1 || rng.random::<bool>() {
            return self.random_var(rng);
        }
        let op = Self::random_op(rng);
        let l = self.grow_node(rng, levels_left - 1);
        let r = self.grow_node(rng, levels_left - 1);
        Node::Op(op, Box::new(l), Box::new(r))
    }
}
