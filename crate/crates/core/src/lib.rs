//! Genetic feature-subset selection and boosted-tree hyperparameter search
//! for imbalanced binary text classification.
//!
//! The pipeline: [`corpus`] turns a labelled CSV into a TF-IDF matrix,
//! [`ga`] searches booster settings and feature subsets with [`gbt`] as the
//! learner, [`eval`] cross-validates the winner, [`stats`] compares runs and
//! [`baselines`] provides Chi-square and PCA reference arms.

pub mod baselines;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod ga;
pub mod gbt;
pub mod report;
pub mod seed;
pub mod sparse;
pub mod stats;

pub use error::{Error, Result};
pub use sparse::SparseMatrix;
