//! Agreement between an importance vector and the SHAP reference.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explain::ImportanceVector;

/// Slack on the cumulative-weight comparison so normalized scores that sum
/// to θ up to rounding still reach it.
const CUMULATIVE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("all scores are zero; top-k is undefined")]
    Degenerate,
    #[error("top-k threshold must lie in (0, 1], got {0}")]
    InvalidTheta(f64),
    #[error("rank correlation needs at least two features, got {0}")]
    TooFewFeatures(usize),
    #[error("vectors cover different features")]
    FeatureMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopK {
    pub k: usize,
    /// Indices into the vector's features, best first.
    pub indices: Vec<usize>,
    pub features: Vec<String>,
}

/// Smallest prefix of the descending ranking whose cumulative score reaches
/// `theta`.
pub fn dynamic_top_k(scores: &ImportanceVector, theta: f64) -> Result<TopK, MetricError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(MetricError::InvalidTheta(theta));
    }
    if scores.degenerate || scores.scores.iter().all(|s| *s == 0.0) {
        return Err(MetricError::Degenerate);
    }
    let order = scores.ranking();
    let mut acc = 0.0;
    let mut k = order.len();
    for (i, &j) in order.iter().enumerate() {
        acc += scores.scores[j];
        if acc >= theta - CUMULATIVE_EPS {
            k = i + 1;
            break;
        }
    }
    Ok(top_n(scores, k))
}

/// The `n` highest-scored features of `scores`.
pub fn top_n(scores: &ImportanceVector, n: usize) -> TopK {
    let indices: Vec<usize> = scores.ranking().into_iter().take(n).collect();
    TopK {
        k: indices.len(),
        features: indices.iter().map(|&i| scores.features[i].clone()).collect(),
        indices,
    }
}

/// 1 when `other`'s top-k holds the same features as the reference top-k.
pub fn topk_set_match(reference: &TopK, other: &ImportanceVector) -> f64 {
    let mine = top_n(other, reference.k);
    let mut a = reference.features.clone();
    let mut b = mine.features;
    a.sort();
    b.sort();
    (a == b) as u8 as f64
}

/// 1 when `other`'s top-k equals the reference top-k in order.
pub fn topk_exact_match(reference: &TopK, other: &ImportanceVector) -> f64 {
    (top_n(other, reference.k).features == reference.features) as u8 as f64
}

/// Ranks (1 = highest score) with ties sharing their average rank.
pub fn average_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of two rank vectors mapped to `[0, 1]` by
/// `(ρ + 1) / 2`. A constant ranking carries no order information and
/// scores ρ = 0.
pub fn spearman_from_ranks(a: &[f64], b: &[f64]) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::FeatureMismatch);
    }
    let n = a.len();
    if n < 2 {
        return Err(MetricError::TooFewFeatures(n));
    }
    if a == b && a.iter().any(|r| *r != a[0]) {
        return Ok(1.0);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    let rho = if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
    };
    Ok((rho + 1.0) / 2.0)
}

/// Normalized Spearman correlation of two importance vectors over the same
/// features.
pub fn spearman_norm(a: &ImportanceVector, b: &ImportanceVector) -> Result<f64, MetricError> {
    if a.features != b.features {
        return Err(MetricError::FeatureMismatch);
    }
    spearman_from_ranks(&average_ranks(&a.scores), &average_ranks(&b.scores))
}

/// Spearman restricted to the features in `subset` (indices).
pub fn spearman_norm_subset(
    a: &ImportanceVector,
    b: &ImportanceVector,
    subset: &[usize],
) -> Result<f64, MetricError> {
    if a.features != b.features {
        return Err(MetricError::FeatureMismatch);
    }
    let pick = |v: &ImportanceVector| subset.iter().map(|&i| v.scores[i]).collect::<Vec<_>>();
    spearman_from_ranks(&average_ranks(&pick(a)), &average_ranks(&pick(b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavedRuntime {
    /// Clamped at zero.
    pub pct: f64,
    /// Before clamping; negative when the method was slower than SHAP.
    pub raw: f64,
}

/// Percentage of SHAP's runtime saved by a method. `None` without a positive
/// SHAP runtime.
pub fn saved_runtime_pct(method_seconds: f64, shap_seconds: f64) -> Option<SavedRuntime> {
    if !(shap_seconds > 0.0) {
        return None;
    }
    let raw = 100.0 * (shap_seconds - method_seconds) / shap_seconds;
    Some(SavedRuntime { pct: raw.max(0.0), raw })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpearmanScope {
    /// Over the full feature ranking.
    #[default]
    Full,
    /// Over the reference's dynamic top-k features only.
    TopK,
}

/// Per-sample agreement of `other` with the SHAP reference. `None` entries
/// are undefined for this sample and excluded from averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleAgreement {
    pub k: Option<usize>,
    pub set: Option<f64>,
    pub exact: Option<f64>,
    pub spearman: Option<f64>,
}

pub fn agreement(
    shap: &ImportanceVector,
    other: &ImportanceVector,
    theta: f64,
    scope: SpearmanScope,
) -> Result<SampleAgreement, MetricError> {
    let top = match dynamic_top_k(shap, theta) {
        Ok(t) => Some(t),
        Err(MetricError::Degenerate) => None,
        Err(e) => return Err(e),
    };
    let Some(top) = top else {
        return Ok(SampleAgreement { k: None, set: None, exact: None, spearman: None });
    };
    let spearman = match scope {
        SpearmanScope::Full => spearman_norm(shap, other),
        SpearmanScope::TopK => spearman_norm_subset(shap, other, &top.indices),
    };
    let spearman = match spearman {
        Ok(v) => Some(v),
        Err(MetricError::TooFewFeatures(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(SampleAgreement {
        k: Some(top.k),
        set: Some(topk_set_match(&top, other)),
        exact: Some(topk_exact_match(&top, other)),
        spearman,
    })
}

/// Mean of the defined values; `None` when there are none.
pub fn mean_defined(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values.into_iter().flatten() {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::ExplainMethod;

    fn vector(names: &[&str], raw: &[f64]) -> ImportanceVector {
        ImportanceVector::from_raw(
            names.iter().map(|s| s.to_string()).collect(),
            raw.to_vec(),
            ExplainMethod::Mdi,
        )
    }

    #[test]
    fn average_ranks_share_ties() {
        assert_eq!(average_ranks(&[0.1, 0.5, 0.5, 0.0]), vec![3.0, 1.5, 1.5, 4.0]);
    }

    #[test]
    fn degenerate_top_k() {
        assert_eq!(dynamic_top_k(&vector(&["a", "b"], &[0.0, 0.0]), 0.8), Err(MetricError::Degenerate));
        assert!(dynamic_top_k(&vector(&["a"], &[1.0]), 0.0).is_err());
        assert!(dynamic_top_k(&vector(&["a"], &[1.0]), 1.5).is_err());
    }

    #[test]
    fn ties_follow_schema_order() {
        let v = vector(&["a", "b", "c"], &[0.2, 0.4, 0.4]);
        assert_eq!(top_n(&v, 2).features, vec!["b", "c"]);
    }

    #[test]
    fn constant_ranking_is_uninformative() {
        assert_eq!(spearman_from_ranks(&[1.5, 1.5], &[1.0, 2.0]).unwrap(), 0.5);
        assert_eq!(spearman_from_ranks(&[1.5, 1.5], &[1.5, 1.5]).unwrap(), 0.5);
    }

    #[test]
    fn degenerate_reference_is_excluded() {
        let z = vector(&["a", "b"], &[0.0, 0.0]);
        let a = agreement(&z, &vector(&["a", "b"], &[1.0, 0.0]), 0.8, SpearmanScope::Full).unwrap();
        assert_eq!(a.k, None);
        assert_eq!(a.spearman, None);
    }
}
