//! A laboratory for weak-to-strong learning under parallel query budgets.
//!
//! * [`domain`], [`oracle`], [`ledger`]: labelings, distributions, the
//!   weak-learner interface and `(p, t)` accounting.
//! * [`boosters`]: fixed-weight AdaBoost and single-round sampled boosting.
//! * [`adversary`]: a randomized weak learner that hides labels from
//!   learners with few rounds of queries.
//! * [`stats`]: tail bounds for sampling without replacement,
//!   ε-approximation checks, and generalization-bound calculators.
//! * [`harness`]: seeded, gridded experiment execution with CSV/JSON output.

pub mod adversary;
pub mod boosters;
pub mod domain;
pub mod error;
pub mod harness;
pub mod ledger;
pub mod oracle;
pub mod record;
pub mod rng;
pub mod stats;

pub use domain::{make_uniform_weights, weighted_error, Concept, FiniteDomain, Hypothesis, Label, TrainingSet, WeightVector};
pub use error::{LabError, Result};
pub use ledger::{OracleSession, ParallelBudget, QueryLedger};
pub use oracle::{weak_learner_query, ErmOracle, WeakLearner};
