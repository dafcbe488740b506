//! Greedy construction of decision trees that minimise the worst-case
//! testing cost of identifying an object's class, together with exact
//! small-instance oracles, dataset ingestion and trade-off evaluation.
//!
//! The crate is organised bottom-up:
//!
//! - [`instance`] and [`tree`]: the problem model and tree evaluators;
//! - [`impurity`]: admissible impurity functions and an exhaustive checker;
//! - [`greedy`]: the greedy builder with early stopping and budgets;
//! - [`oracle`]: brute-force optimal costs and tree enumeration;
//! - [`data`]: CSV ingestion, preprocessing and instance generators;
//! - [`eval`]: trade-off sweeps and bound audits.

pub mod data;
pub mod eval;
pub mod greedy;
pub mod impurity;
pub mod instance;
pub mod oracle;
pub mod rational;
pub mod tree;

pub use greedy::{build, build_budgeted, BuildConfig, BuildTrace, GreedyError, Score, TieBreak};
pub use impurity::{Impurity, ImpurityError, ImpurityFn, PolynomialSpec};
pub use instance::{ClassCounts, ClassId, CoreError, Instance, ObjectId, ObjectRecord, TestId, TestSpec};
pub use oracle::{OracleError, OracleLimits};
pub use rational::Rational;
pub use tree::{DecisionTree, Node, NodeId};
