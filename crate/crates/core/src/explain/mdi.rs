use crate::forest::{gini_of, ArfEnsemble, HoeffdingTree, Instance, NodeStats};

use super::importance::{ExplainMethod, ImportanceVector};
use super::ExplainError;

/// Gini index `1 - Σ p_k²` of a node's class frequencies.
pub fn gini(stats: &NodeStats) -> Result<f64, ExplainError> {
    if stats.total() <= 0.0 {
        return Err(ExplainError::UndefinedImpurity);
    }
    Ok(gini_of(&stats.class_freq))
}

/// Weighted impurity decrease of a binary split, clamped at zero.
pub fn impurity_decrease(
    parent: &NodeStats,
    left: &NodeStats,
    right: &NodeStats,
) -> Result<f64, ExplainError> {
    let n = parent.total();
    let g = gini(parent)?;
    let term = |c: &NodeStats| {
        let w = c.total();
        if w > 0.0 {
            w / n * gini_of(&c.class_freq)
        } else {
            0.0
        }
    };
    Ok((g - term(left) - term(right)).max(0.0))
}

/// Impurity decrease of split node `node` in `tree`, read from the frozen
/// parent statistics and the branch statistics recorded with the split.
pub fn mdi_node(tree: &HoeffdingTree, node: usize) -> Result<f64, ExplainError> {
    let n = tree.node(node);
    let split = n.split().ok_or(ExplainError::NotASplit(node))?;
    impurity_decrease(&n.stats, &split.branch_stats[0], &split.branch_stats[1])
}

/// Per-instance MDI: impurity decreases of the split nodes on `x`'s decision
/// path in every member tree, accumulated per split feature and normalized
/// over `active`. Split features outside `active` are ignored.
pub fn mdi_importance(x: &Instance, ensemble: &ArfEnsemble, active: &[String]) -> ImportanceVector {
    MdiExplainer::new(ensemble, active).explain(x)
}

/// [`mdi_importance`] with the feature lookup resolved once, for explaining
/// many instances against the same ensemble.
pub struct MdiExplainer<'a> {
    ensemble: &'a ArfEnsemble,
    active: &'a [String],
    slot: Vec<Option<usize>>,
}

impl<'a> MdiExplainer<'a> {
    pub fn new(ensemble: &'a ArfEnsemble, active: &'a [String]) -> Self {
        let reg = ensemble.registry();
        let slot = (0..reg.len())
            .map(|c| active.iter().position(|f| f == reg.name(c)))
            .collect();
        Self { ensemble, active, slot }
    }

    pub fn explain(&self, x: &Instance) -> ImportanceVector {
        let row = self.ensemble.registry().dense(x);
        let mut raw = vec![0.0; self.active.len()];
        for tree in self.ensemble.trees() {
            for id in tree.split_path(&row) {
                let split = tree.node(id).split().expect("split_path yields split nodes");
                if let Some(j) = self.slot.get(split.feature).copied().flatten() {
                    raw[j] += mdi_node(tree, id).expect("split nodes carry stats");
                }
            }
        }
        ImportanceVector::from_raw(self.active.to_vec(), raw, ExplainMethod::Mdi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(a: f64, b: f64) -> NodeStats {
        NodeStats::new([a, b])
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&s(5.0, 5.0)).unwrap(), 0.5);
        assert_eq!(gini(&s(10.0, 0.0)).unwrap(), 0.0);
        assert!((gini(&s(8.0, 2.0)).unwrap() - 0.32).abs() < 1e-15);
        assert_eq!(gini(&s(0.0, 0.0)), Err(ExplainError::UndefinedImpurity));
    }

    #[test]
    fn impurity_decrease_examples() {
        let d = impurity_decrease(&s(50.0, 50.0), &s(50.0, 0.0), &s(0.0, 50.0)).unwrap();
        assert_eq!(d, 0.5);
        let d = impurity_decrease(&s(40.0, 20.0), &s(20.0, 10.0), &s(20.0, 10.0)).unwrap();
        assert!(d.abs() < 1e-15);
        let d = impurity_decrease(&s(8.0, 2.0), &s(5.0, 0.0), &s(3.0, 2.0)).unwrap();
        assert!((d - 0.08).abs() < 1e-15);
    }

    #[test]
    fn negative_decrease_is_clamped() {
        // children heavier than the parent can push the raw value below zero
        let d = impurity_decrease(&s(10.0, 0.0), &s(30.0, 30.0), &s(0.0, 0.0)).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn leaf_is_not_a_split() {
        let t = HoeffdingTree::new(Default::default(), 0);
        assert_eq!(mdi_node(&t, 0), Err(ExplainError::NotASplit(0)));
    }
}
