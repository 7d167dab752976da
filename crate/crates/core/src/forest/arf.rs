use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::adwin::Adwin;
use super::histogram::ClassCounts;
use super::instance::{FeatureRegistry, Instance, Label, N_CLASSES};
use super::tree::{HoeffdingTree, TreeParams};
use super::ForestError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArfParams {
    pub n_trees: usize,
    /// Poisson rate of the online bagging weights.
    pub lambda: f64,
    pub tree: TreeParams,
    pub warning_delta: f64,
    pub drift_delta: f64,
    pub seed: u64,
}

impl Default for ArfParams {
    fn default() -> Self {
        Self {
            n_trees: 10,
            lambda: 6.0,
            tree: TreeParams::default(),
            warning_delta: 0.01,
            drift_delta: 0.001,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
struct Member {
    tree: HoeffdingTree,
    warning: Adwin,
    drift: Adwin,
    background: Option<HoeffdingTree>,
}

/// Counters of warning and drift events raised by the member detectors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorEvents {
    pub warnings: u64,
    pub drifts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub class: Label,
    pub distribution: ClassCounts,
}

/// A decision path: visited node ids and the split feature of every
/// internal node along the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionPath {
    pub nodes: Vec<usize>,
    pub split_features: Vec<String>,
}

/// Adaptive random forest over Hoeffding trees.
///
/// Each member sees every instance with a Poisson(`lambda`) weight. A member
/// whose warning detector fires starts a background tree; if its drift
/// detector later fires the background tree replaces it (or a fresh tree
/// does, when no background exists). The member count never changes.
#[derive(Debug, Clone)]
pub struct ArfEnsemble {
    params: ArfParams,
    registry: FeatureRegistry,
    members: Vec<Member>,
    rng: ChaCha8Rng,
    poisson: Poisson<f64>,
    trees_created: u64,
    events: DetectorEvents,
    n_seen: u64,
}

impl ArfEnsemble {
    pub fn new(params: ArfParams) -> Result<Self, ForestError> {
        if params.n_trees == 0 {
            return Err(ForestError::InvalidParams("n_trees must be at least 1".into()));
        }
        let poisson = Poisson::new(params.lambda)
            .map_err(|e| ForestError::InvalidParams(format!("lambda {}: {e}", params.lambda)))?;
        let mut ens = Self {
            params,
            registry: FeatureRegistry::new(),
            members: Vec::with_capacity(params.n_trees),
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            poisson,
            trees_created: 0,
            events: DetectorEvents::default(),
            n_seen: 0,
        };
        for _ in 0..params.n_trees {
            let tree = ens.fresh_tree();
            ens.members.push(Member {
                tree,
                warning: Adwin::new(params.warning_delta),
                drift: Adwin::new(params.drift_delta),
                background: None,
            });
        }
        Ok(ens)
    }

    /// Assemble a predict-only ensemble from given trees.
    pub fn from_trees(
        params: ArfParams,
        registry: FeatureRegistry,
        trees: Vec<HoeffdingTree>,
    ) -> Result<Self, ForestError> {
        let mut ens = Self::new(ArfParams {
            n_trees: trees.len(),
            ..params
        })?;
        ens.registry = registry;
        for (m, t) in ens.members.iter_mut().zip(trees) {
            m.tree = t;
        }
        Ok(ens)
    }

    fn fresh_tree(&mut self) -> HoeffdingTree {
        let seed = splitmix64(self.params.seed ^ splitmix64(self.trees_created));
        self.trees_created += 1;
        HoeffdingTree::new(self.params.tree, seed)
    }

    pub fn params(&self) -> &ArfParams {
        &self.params
    }

    pub fn registry(&self) -> &FeatureRegistry {
        &self.registry
    }

    pub fn n_trees(&self) -> usize {
        self.members.len()
    }

    pub fn n_seen(&self) -> u64 {
        self.n_seen
    }

    pub fn trees(&self) -> impl Iterator<Item = &HoeffdingTree> {
        self.members.iter().map(|m| &m.tree)
    }

    pub fn tree(&self, member: usize) -> &HoeffdingTree {
        &self.members[member].tree
    }

    pub fn has_background(&self, member: usize) -> bool {
        self.members[member].background.is_some()
    }

    pub fn events(&self) -> DetectorEvents {
        self.events
    }

    pub fn dense(&self, x: &Instance) -> Vec<f64> {
        self.registry.dense(x)
    }

    pub fn learn_one(&mut self, x: &Instance) -> Result<(), ForestError> {
        x.validate()?;
        self.registry.register_all(x);
        let row = self.registry.dense(x);
        let label = x.label as usize;
        self.n_seen += 1;
        for i in 0..self.members.len() {
            let predicted = argmax(&self.members[i].tree.predict_proba_dense(&row));
            let k = self.poisson.sample(&mut self.rng);
            if k <= 0.0 {
                continue;
            }
            let error = if predicted == label { 0.0 } else { 1.0 };
            let member = &mut self.members[i];
            if let Some(bg) = member.background.as_mut() {
                bg.learn_dense(&row, label, k);
            }
            member.tree.learn_dense(&row, label, k);

            if member.warning.update(error) {
                self.events.warnings += 1;
                let bg = self.fresh_tree();
                let member = &mut self.members[i];
                member.background = Some(bg);
                member.warning = member.warning.reset();
            }
            if self.members[i].drift.update(error) {
                self.events.drifts += 1;
                let replacement = match self.members[i].background.take() {
                    Some(bg) => bg,
                    None => self.fresh_tree(),
                };
                let member = &mut self.members[i];
                member.tree = replacement;
                member.warning = member.warning.reset();
                member.drift = member.drift.reset();
            }
        }
        Ok(())
    }

    /// Mean of the members' leaf class distributions on a dense row.
    pub fn predict_proba_dense(&self, row: &[f64]) -> ClassCounts {
        let mut acc = [0.0; N_CLASSES];
        for m in &self.members {
            let p = m.tree.predict_proba_dense(row);
            for (a, v) in acc.iter_mut().zip(p) {
                *a += v;
            }
        }
        let n = self.members.len() as f64;
        acc.map(|a| a / n)
    }

    /// Class-1 probability on a dense row.
    pub fn proba_positive_dense(&self, row: &[f64]) -> f64 {
        self.predict_proba_dense(row)[1]
    }

    pub fn predict_one(&self, x: &Instance) -> Prediction {
        let distribution = self.predict_proba_dense(&self.registry.dense(x));
        Prediction {
            class: argmax(&distribution) as Label,
            distribution,
        }
    }

    pub fn route(&self, member: usize, x: &Instance) -> DecisionPath {
        let tree = &self.members[member].tree;
        let nodes = tree.route_dense(&self.registry.dense(x));
        let split_features = nodes
            .iter()
            .filter_map(|&id| tree.node(id).split())
            .map(|s| self.registry.name(s.feature).to_string())
            .collect();
        DecisionPath {
            nodes,
            split_features,
        }
    }
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(dist: &ClassCounts) -> usize {
    let mut best = 0;
    for (i, v) in dist.iter().enumerate().skip(1) {
        if *v > dist[best] {
            best = i;
        }
    }
    best
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
