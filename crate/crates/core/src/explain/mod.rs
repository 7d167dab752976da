//! Feature-importance engines: exact Shapley values over coalitions and
//! per-instance mean decrease in impurity along decision paths.

mod importance;
mod mdi;
mod shapley;

pub use importance::{ExplainMethod, ImportanceVector};
pub use mdi::{gini, impurity_decrease, mdi_importance, mdi_node, MdiExplainer};
pub use shapley::{
    shap_importance, shapley, shapley_with_budget, CoalitionEvaluator, CoalitionGame,
    ProbabilityModel, TableGame, MAX_EXACT_FEATURES,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExplainError {
    #[error("{features} features exceed the exact Shapley budget of {budget}")]
    FeatureBudget { features: usize, budget: usize },
    #[error("coalition evaluation needs a non-empty background sample")]
    EmptyBackground,
    #[error("rows and feature columns disagree in shape")]
    RowShape,
    #[error("Gini impurity is undefined for a node without samples")]
    UndefinedImpurity,
    #[error("node {0} is a leaf, not a split")]
    NotASplit(usize),
}
