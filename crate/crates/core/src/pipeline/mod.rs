//! File-level workflow: load prediction and label files, estimate priors,
//! grid-search hyperparameters on validation data and re-adjust test
//! predictions. [`cli`] wires these into the `can` command.

pub mod apply;
pub mod cli;
pub mod fixture;
pub mod io;
pub mod priors;
pub mod report;
pub mod tune;

pub use apply::{Adjusted, CanModel, UnitRecord};
pub use io::{format_score, LabelFile, PredictionFile, TaskMode};
pub use priors::{class_priors, compute_priors};
pub use tune::{grid_search, parse_grid, GridRow, GridSearchResult, HyperGrid, Objective, Scorer};
