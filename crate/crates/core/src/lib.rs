//! Co-frequency analysis of categorical predictors.
//!
//! This crate clusters the levels of a high-cardinality categorical
//! predictor by how often pairs of levels are placed on the same side of
//! level-set splits in a random forest, then validates the clusters with
//! the modeling pipeline built around that statistic:
//!
//! * [`datamodel`] — schema-typed CSV ingestion, rare-level bucketing,
//!   indicator encoding, train/test splitting, synthetic cohorts.
//! * [`forest`] — CART classification trees with exact categorical
//!   (level-set) splits and dice-rolling feature selection.
//! * [`cofa`] — the pairwise co-frequency statistic, its permutation
//!   null, z-scores with Bonferroni masking, and the distance matrix.
//! * [`cluster`] — complete-linkage hierarchical clustering, tree
//!   cutting, Newick export.
//! * [`glm`] — LASSO-penalized logistic regression (coordinate descent),
//!   cross-validated penalty selection, MLE refit, clusterwise models.
//! * [`eval`] — AUC, subgroup-weighted AUC, repeated random
//!   sub-sampling, and the corrected resampled t-test.
//! * [`pipeline`] — end-to-end orchestration and artifact output used by
//!   the `cofa` command-line tool.

pub mod cluster;
pub mod cofa;
pub mod datamodel;
pub mod error;
pub mod eval;
pub mod forest;
pub mod glm;
pub mod matrix;
pub mod pipeline;
pub mod rng;

pub use error::{Error, Result};
