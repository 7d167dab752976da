//! Drift-aware feature importance for streaming binary classifiers.
//!
//! An adaptive random forest learns the stream; per batch a KS drift test
//! decides whether instances are explained with exact Shapley values or with
//! path-based mean decrease in impurity.

pub mod dafi;
pub mod data;
pub mod drift;
pub mod explain;
pub mod forest;
pub mod harness;

pub use dafi::{explain_batch, BatchExplanation, DafiConfig, DafiError};
pub use drift::{detect, ks_statistic, DriftError, DriftReport, Evaluation, FeatureDrift};
pub use explain::{ExplainError, ExplainMethod, ImportanceVector};
pub use forest::{ArfEnsemble, ArfParams, ForestError, Instance};
pub use harness::{run_experiment, BatchPlan, ExperimentConfig, ExperimentReport, HarnessError, Method};
