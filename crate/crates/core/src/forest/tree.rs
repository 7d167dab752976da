use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::histogram::{self, ClassCounts, NumericObserver};
use super::instance::N_CLASSES;

/// Class-frequency statistics of a node. For split nodes these are frozen at
/// the moment the node stopped being a leaf.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    pub class_freq: ClassCounts,
}

impl NodeStats {
    pub fn new(class_freq: ClassCounts) -> Self {
        Self { class_freq }
    }

    pub fn total(&self) -> f64 {
        histogram::sum(&self.class_freq)
    }

    /// Normalized class distribution; uniform when nothing was observed.
    pub fn distribution(&self) -> ClassCounts {
        let total = self.total();
        if total > 0.0 {
            self.class_freq.map(|c| c / total)
        } else {
            [1.0 / N_CLASSES as f64; N_CLASSES]
        }
    }

    fn is_pure(&self) -> bool {
        self.class_freq.iter().filter(|&&c| c > 0.0).count() <= 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Weight a leaf must accumulate between split attempts.
    pub grace_period: f64,
    /// δ in the Hoeffding bound.
    pub split_confidence: f64,
    pub tie_threshold: f64,
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            grace_period: 50.0,
            split_confidence: 1e-7,
            tie_threshold: 0.05,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafState {
    observers: Vec<Option<NumericObserver>>,
    weight_at_last_attempt: f64,
}

impl LeafState {
    pub fn new(initial_weight: f64) -> Self {
        Self {
            observers: Vec::new(),
            weight_at_last_attempt: initial_weight,
        }
    }

    /// Feature indices this leaf has received values for.
    pub fn observed_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.observers
            .iter()
            .enumerate()
            .filter_map(|(i, o)| o.as_ref().map(|_| i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    /// Class frequencies sent to each branch when the split was made.
    pub branch_stats: [NodeStats; 2],
}

impl Split {
    /// Child to follow when the split feature is missing: the branch that
    /// received more mass at split time, left on ties.
    pub fn heavier_child(&self) -> usize {
        if self.branch_stats[1].total() > self.branch_stats[0].total() {
            self.right
        } else {
            self.left
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Leaf(LeafState),
    Split(Split),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub stats: NodeStats,
    pub depth: usize,
    pub kind: NodeKind,
}

impl Node {
    pub fn split(&self) -> Option<&Split> {
        match &self.kind {
            NodeKind::Split(s) => Some(s),
            NodeKind::Leaf(_) => None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf(_))
    }
}

/// Incrementally grown binary classification tree. Nodes live in an arena;
/// node 0 is the root and ids never change once assigned.
#[derive(Debug, Clone)]
pub struct HoeffdingTree {
    params: TreeParams,
    nodes: Vec<Node>,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone, Copy)]
struct ScoredSplit {
    feature: usize,
    merit: f64,
    threshold: f64,
    left: ClassCounts,
    right: ClassCounts,
}

impl HoeffdingTree {
    pub fn new(params: TreeParams, seed: u64) -> Self {
        Self {
            params,
            nodes: vec![Node {
                stats: NodeStats::default(),
                depth: 0,
                kind: NodeKind::Leaf(LeafState::new(0.0)),
            }],
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Assemble a tree from explicit nodes, for inspection and tests.
    /// Leaves start with empty attribute observers.
    pub fn from_nodes(params: TreeParams, nodes: Vec<Node>, seed: u64) -> Self {
        assert!(!nodes.is_empty(), "a tree needs a root");
        Self {
            params,
            nodes,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Node ids from the root to the leaf reached by `row`.
    pub fn route_dense(&self, row: &[f64]) -> Vec<usize> {
        let mut path = vec![0];
        let mut id = 0;
        while let NodeKind::Split(s) = &self.nodes[id].kind {
            id = next_child(s, row);
            path.push(id);
        }
        path
    }

    /// Split node ids on the path of `row`, root first, without allocating.
    pub fn split_path<'a>(&'a self, row: &'a [f64]) -> impl Iterator<Item = usize> + 'a {
        std::iter::successors(Some(0), move |&id| match &self.nodes[id].kind {
            NodeKind::Split(s) => Some(next_child(s, row)),
            NodeKind::Leaf(_) => None,
        })
        .filter(move |&id| matches!(self.nodes[id].kind, NodeKind::Split(_)))
    }

    pub fn leaf_for(&self, row: &[f64]) -> usize {
        let mut id = 0;
        while let NodeKind::Split(s) = &self.nodes[id].kind {
            id = next_child(s, row);
        }
        id
    }

    pub fn predict_proba_dense(&self, row: &[f64]) -> ClassCounts {
        self.nodes[self.leaf_for(row)].stats.distribution()
    }

    pub fn learn_dense(&mut self, row: &[f64], label: usize, weight: f64) {
        let leaf_id = self.leaf_for(row);
        let node = &mut self.nodes[leaf_id];
        node.stats.class_freq[label] += weight;
        let NodeKind::Leaf(leaf) = &mut node.kind else {
            unreachable!("routing ends at a leaf");
        };
        if leaf.observers.len() < row.len() {
            leaf.observers.resize(row.len(), None);
        }
        for (f, &v) in row.iter().enumerate() {
            if v.is_nan() {
                continue;
            }
            match &mut leaf.observers[f] {
                Some(o) => o.observe(v, label, weight),
                slot => *slot = Some(NumericObserver::new(v, label, weight)),
            }
        }
        let seen = node.stats.total();
        if seen - leaf.weight_at_last_attempt >= self.params.grace_period {
            leaf.weight_at_last_attempt = seen;
            self.attempt_split(leaf_id);
        }
    }

    fn attempt_split(&mut self, leaf_id: usize) {
        let node = &self.nodes[leaf_id];
        if node.stats.is_pure() {
            return;
        }
        if self.params.max_depth.is_some_and(|d| node.depth >= d) {
            return;
        }
        let NodeKind::Leaf(leaf) = &node.kind else {
            return;
        };
        let pool: Vec<usize> = leaf
            .observers
            .iter()
            .enumerate()
            .filter(|(_, o)| o.as_ref().is_some_and(|o| o.has_candidates()))
            .map(|(i, _)| i)
            .collect();
        if pool.is_empty() {
            return;
        }
        let k = subspace_size(pool.len());
        let chosen: Vec<usize> = if k < pool.len() {
            let mut picked: Vec<usize> = index::sample(&mut self.rng, pool.len(), k)
                .into_iter()
                .map(|i| pool[i])
                .collect();
            picked.sort_unstable();
            picked
        } else {
            pool
        };

        let mut best: Option<ScoredSplit> = None;
        let mut second_merit = 0.0; // the "do not split" option
        for f in chosen {
            let obs = leaf.observers[f].as_ref().expect("pooled observer");
            let Some(cand) = best_split_for(f, obs) else {
                continue;
            };
            match best {
                Some(b) if cand.merit > b.merit => {
                    second_merit = f64::max(second_merit, b.merit);
                    best = Some(cand);
                }
                Some(_) => second_merit = f64::max(second_merit, cand.merit),
                None => best = Some(cand),
            }
        }
        let Some(best) = best else {
            return;
        };
        if best.merit <= 0.0 {
            return;
        }
        let n = node.stats.total();
        let bound = ((1.0 / self.params.split_confidence).ln() / (2.0 * n)).sqrt();
        if best.merit - second_merit > bound || bound < self.params.tie_threshold {
            self.apply_split(leaf_id, best);
        }
    }

    fn apply_split(&mut self, leaf_id: usize, best: ScoredSplit) {
        let parent = self.nodes[leaf_id].stats;
        let depth = self.nodes[leaf_id].depth;
        let NodeKind::Leaf(leaf) = &self.nodes[leaf_id].kind else {
            return;
        };
        // mass this leaf saw without the split feature (or inherited from its
        // parent) follows the heavier branch, as routing does
        let observed = leaf.observers[best.feature]
            .as_ref()
            .map(|o| o.totals())
            .unwrap_or_default();
        let residual = histogram::sub(parent.class_freq, observed);
        let (mut left, mut right) = (best.left, best.right);
        if histogram::sum(&right) > histogram::sum(&left) {
            right = histogram::add(right, residual);
        } else {
            left = histogram::add(left, residual);
        }
        let l = self.nodes.len();
        let branch_stats = [NodeStats::new(left), NodeStats::new(right)];
        for stats in branch_stats {
            self.nodes.push(Node {
                stats,
                depth: depth + 1,
                kind: NodeKind::Leaf(LeafState::new(stats.total())),
            });
        }
        self.nodes[leaf_id].kind = NodeKind::Split(Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: l + 1,
            branch_stats,
        });
    }
}

fn next_child(s: &Split, row: &[f64]) -> usize {
    match row.get(s.feature) {
        Some(v) if !v.is_nan() => {
            if *v < s.threshold {
                s.left
            } else {
                s.right
            }
        }
        _ => s.heavier_child(),
    }
}

/// Features examined per split attempt when `pool` features are splittable.
pub fn subspace_size(pool: usize) -> usize {
    let k = (pool as f64).sqrt().ceil() as usize + 1;
    k.min(pool)
}

pub fn gini_of(counts: &ClassCounts) -> f64 {
    let total = histogram::sum(counts);
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

fn best_split_for(feature: usize, obs: &NumericObserver) -> Option<ScoredSplit> {
    let pre = obs.totals();
    let w = histogram::sum(&pre);
    let g = gini_of(&pre);
    let mut best: Option<ScoredSplit> = None;
    for c in obs.candidates() {
        let wl = histogram::sum(&c.left);
        let wr = histogram::sum(&c.right);
        let merit = g - wl / w * gini_of(&c.left) - wr / w * gini_of(&c.right);
        if best.is_none_or(|b| merit > b.merit) {
            best = Some(ScoredSplit {
                feature,
                merit,
                threshold: c.threshold,
                left: c.left,
                right: c.right,
            });
        }
    }
    best
}
