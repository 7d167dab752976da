use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Which engine produced an importance vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExplainMethod {
    #[serde(rename = "SHAP")]
    Shap,
    #[serde(rename = "MDI")]
    Mdi,
}

impl fmt::Display for ExplainMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExplainMethod::Shap => write!(f, "SHAP"),
            ExplainMethod::Mdi => write!(f, "MDI"),
        }
    }
}

/// Normalized, non-negative per-feature importance for one explained
/// instance. `features` is in schema order, which is also the tie-break
/// order for every ranking derived from the vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    pub features: Vec<String>,
    pub scores: Vec<f64>,
    pub method: ExplainMethod,
    pub drift_flag: bool,
    /// Set when every raw score was zero; `scores` are then all zero.
    pub degenerate: bool,
}

impl ImportanceVector {
    /// Normalize non-negative raw weights so they sum to one.
    pub fn from_raw(features: Vec<String>, raw: Vec<f64>, method: ExplainMethod) -> Self {
        debug_assert_eq!(features.len(), raw.len());
        debug_assert!(raw.iter().all(|v| *v >= 0.0));
        let total: f64 = raw.iter().sum();
        let (scores, degenerate) = if total > 0.0 {
            (raw.iter().map(|v| v / total).collect(), false)
        } else {
            (vec![0.0; raw.len()], true)
        };
        Self {
            features,
            scores,
            method,
            drift_flag: false,
            degenerate,
        }
    }

    pub fn with_drift_flag(mut self, flag: bool) -> Self {
        self.drift_flag = flag;
        self
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, feature: &str) -> Option<f64> {
        self.features
            .iter()
            .position(|f| f == feature)
            .map(|i| self.scores[i])
    }

    /// Feature positions by descending score, schema order on ties.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| {
            self.scores[b]
                .partial_cmp(&self.scores[a])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        order
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn normalizes_to_unit_mass() {
        let v = ImportanceVector::from_raw(names(3), vec![3.0, 1.0, 0.0], ExplainMethod::Shap);
        assert_eq!(v.scores, vec![0.75, 0.25, 0.0]);
        assert!(!v.degenerate);
        assert_eq!(v.get("f1"), Some(0.25));
    }

    #[test]
    fn all_zero_is_degenerate() {
        let v = ImportanceVector::from_raw(names(2), vec![0.0, 0.0], ExplainMethod::Mdi);
        assert_eq!(v.scores, vec![0.0, 0.0]);
        assert!(v.degenerate);
    }

    #[test]
    fn ranking_breaks_ties_by_schema_order() {
        let v = ImportanceVector::from_raw(names(4), vec![1.0, 2.0, 1.0, 2.0], ExplainMethod::Mdi);
        assert_eq!(v.ranking(), vec![1, 3, 0, 2]);
    }
}
