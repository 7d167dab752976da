//! Prequential experiment protocol, agreement metrics and scaling sweeps.

mod experiment;
pub mod metrics;
mod plan;
mod report;
mod sweep;

pub use experiment::{run_experiment, ExperimentConfig};
pub use metrics::{
    agreement, average_ranks, dynamic_top_k, saved_runtime_pct, spearman_from_ranks,
    spearman_norm, topk_exact_match, topk_set_match, MetricError, SampleAgreement, SavedRuntime,
    SpearmanScope, TopK,
};
pub use plan::{BatchBounds, BatchPlan};
pub use report::{summarize, BatchRecord, ConfigEcho, ExperimentReport, MethodBatch, MethodSummary, Summary};
pub use sweep::{run_sweep, sweep_csv, SweepAxis, SweepPoint, SweepSpec};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dafi::DafiError;
use crate::data::DataError;
use crate::forest::ForestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "SHAP")]
    Shap,
    #[serde(rename = "MDI")]
    Mdi,
    #[serde(rename = "DAFI")]
    Dafi,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Shap, Method::Mdi, Method::Dafi];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Shap => "SHAP",
            Method::Mdi => "MDI",
            Method::Dafi => "DAFI",
        })
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SHAP" => Ok(Method::Shap),
            "MDI" => Ok(Method::Mdi),
            "DAFI" => Ok(Method::Dafi),
            _ => Err(HarnessError::Config(format!("unknown method `{s}` (expected SHAP, MDI or DAFI)"))),
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Dafi(#[from] DafiError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}
