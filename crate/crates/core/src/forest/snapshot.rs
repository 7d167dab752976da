//! Versioned JSON view of a trained ensemble: topology, thresholds and the
//! frozen node statistics. Attribute observers are not part of the document.

use serde::{Deserialize, Serialize};

use super::arf::{ArfEnsemble, ArfParams};
use super::instance::FeatureRegistry;
use super::tree::{HoeffdingTree, LeafState, Node, NodeKind, NodeStats, Split};
use super::ForestError;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSnapshot {
    pub format_version: u32,
    pub params: ArfParams,
    pub features: Vec<String>,
    pub trees: Vec<TreeSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSnapshot {
    pub nodes: Vec<NodeSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSnapshot {
    pub id: usize,
    pub depth: usize,
    pub stats: NodeStats,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split: Option<SplitSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSnapshot {
    pub feature: String,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    pub branch_stats: [NodeStats; 2],
}

impl EnsembleSnapshot {
    pub fn capture(ens: &ArfEnsemble) -> Self {
        let reg = ens.registry();
        let trees = ens
            .trees()
            .map(|t| TreeSnapshot {
                nodes: t
                    .nodes()
                    .iter()
                    .enumerate()
                    .map(|(id, n)| NodeSnapshot {
                        id,
                        depth: n.depth,
                        stats: n.stats,
                        split: n.split().map(|s| SplitSnapshot {
                            feature: reg.name(s.feature).to_string(),
                            threshold: s.threshold,
                            left: s.left,
                            right: s.right,
                            branch_stats: s.branch_stats,
                        }),
                    })
                    .collect(),
            })
            .collect();
        Self {
            format_version: SNAPSHOT_VERSION,
            params: *ens.params(),
            features: reg.names().to_vec(),
            trees,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ForestError> {
        let snap: Self =
            serde_json::from_str(s).map_err(|e| ForestError::Snapshot(e.to_string()))?;
        if snap.format_version != SNAPSHOT_VERSION {
            return Err(ForestError::Snapshot(format!(
                "unsupported format_version {} (expected {SNAPSHOT_VERSION})",
                snap.format_version
            )));
        }
        Ok(snap)
    }

    /// Rebuild a predict-only ensemble. Leaves come back without attribute
    /// observers, so further learning restarts split statistics.
    pub fn restore(&self) -> Result<ArfEnsemble, ForestError> {
        let mut registry = FeatureRegistry::new();
        for f in &self.features {
            registry.register(f);
        }
        let mut trees = Vec::with_capacity(self.trees.len());
        for t in &self.trees {
            let mut nodes = Vec::with_capacity(t.nodes.len());
            for (i, n) in t.nodes.iter().enumerate() {
                let bad = |m: String| ForestError::Snapshot(format!("node {i}: {m}"));
                if n.id != i {
                    return Err(bad(format!("id {} out of order", n.id)));
                }
                let kind = match &n.split {
                    None => NodeKind::Leaf(LeafState::new(n.stats.total())),
                    Some(s) => {
                        let feature = registry
                            .index_of(&s.feature)
                            .ok_or_else(|| bad(format!("unknown feature `{}`", s.feature)))?;
                        let in_range = |c: usize| c > i && c < t.nodes.len();
                        if !in_range(s.left) || !in_range(s.right) || s.left == s.right {
                            return Err(bad("child ids must follow their parent".into()));
                        }
                        NodeKind::Split(Split {
                            feature,
                            threshold: s.threshold,
                            left: s.left,
                            right: s.right,
                            branch_stats: s.branch_stats,
                        })
                    }
                };
                nodes.push(Node {
                    stats: n.stats,
                    depth: n.depth,
                    kind,
                });
            }
            if nodes.is_empty() {
                return Err(ForestError::Snapshot("tree without nodes".into()));
            }
            trees.push(HoeffdingTree::from_nodes(self.params.tree, nodes, 0));
        }
        ArfEnsemble::from_trees(self.params, registry, trees)
    }
}
