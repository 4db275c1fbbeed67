//! Classification with alternating normalization.
//!
//! Post-processing for probabilistic classifiers: predictions whose top-k
//! entropy marks them as ambiguous are re-adjusted by alternately normalizing
//! them, together with a reference set of confident predictions, across
//! classes and across examples.
//!
//! - [`an`]: the normalization engine and its scalar-form cross-check.
//! - [`ambiguity`]: top-k entropy, the ambiguity gate and the reference split.
//! - [`multilabel`]: reduction of multi-label scores to binary distributions.
//! - [`metrics`]: expected-accuracy gain, accuracy gain, top-1 and loose F1.
//! - [`simulation`]: the random-matrix Monte Carlo study.
//! - [`pipeline`]: prediction files, priors, grid search and the `can` CLI.

// `!(x <= tol)` comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambiguity;
pub mod an;
pub mod error;
pub mod metrics;
pub mod multilabel;
pub mod pipeline;
pub mod simulation;
pub mod types;

pub use ambiguity::{ambiguity_score, is_ambiguous, partition_validation, AmbiguityConfig, PartitionResult};
pub use an::{readjust, readjust_batch, readjust_scalar_oracle, AugmentedMatrix};
pub use error::{Error, Result};
pub use types::{CanHyperParams, PriorVector, ProbabilityVector, ReferenceMatrix};
