//! Geometric semantic genetic programming (GSGP) for symbolic regression,
//! with local-search-augmented mutation, basis-function local search, and
//! several overfitting-prevention strategies (generation cutoff, ridge
//! regularization, validation-gated adaptive acceptance).
//!
//! Offspring are represented purely by their semantics (the vector of outputs
//! over all fitness cases) plus a lineage record; explicit expression trees
//! exist only for the initial population and the random trees drawn inside
//! the semantic operators.

pub mod adaptive;
pub mod cli;
pub mod dataset;
pub mod engine;
pub mod exprtree;
pub mod regression;
pub mod rng;
pub mod semops;
pub mod stats;
pub mod synthetic;

pub use dataset::{load_dataset, outer_split, Dataset, IndexSplit, InnerSplit};
pub use engine::{run, EvolutionConfig, RunLog, Variant};
pub use semops::{Individual, SemanticVector};
