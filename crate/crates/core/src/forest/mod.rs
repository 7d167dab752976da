//! Incremental Hoeffding trees and the adaptive random forest built on them.

mod adwin;
mod arf;
mod histogram;
mod instance;
mod snapshot;
mod tree;

pub use adwin::Adwin;
pub use arf::{argmax, ArfEnsemble, ArfParams, DecisionPath, DetectorEvents, Prediction};
pub use histogram::{ClassCounts, NumericObserver, N_BINS};
pub use instance::{FeatureRegistry, Instance, Label, N_CLASSES};
pub use snapshot::{EnsembleSnapshot, NodeSnapshot, SplitSnapshot, TreeSnapshot, SNAPSHOT_VERSION};
pub use tree::{
    gini_of, subspace_size, HoeffdingTree, LeafState, Node, NodeKind, NodeStats, Split, TreeParams,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForestError {
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error("invalid forest parameters: {0}")]
    InvalidParams(String),
    #[error("invalid ensemble snapshot: {0}")]
    Snapshot(String),
}
