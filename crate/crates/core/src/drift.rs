//! Batch-to-batch distribution drift from per-feature two-sample
//! Kolmogorov–Smirnov statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::Instance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriftError {
    #[error("KS statistic needs non-empty samples")]
    InsufficientData,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("feature `{feature}` missing from the {batch} batch")]
    SchemaMismatch { feature: String, batch: &'static str },
    #[error("drift threshold must be a non-negative number, got {0}")]
    InvalidThreshold(f64),
}

/// Sup-distance between the empirical CDFs of two samples.
pub fn ks_statistic(prev: &[f64], curr: &[f64]) -> Result<f64, DriftError> {
    if prev.is_empty() || curr.is_empty() {
        return Err(DriftError::InsufficientData);
    }
    if prev.iter().chain(curr).any(|v| !v.is_finite()) {
        return Err(DriftError::NonFinite);
    }
    let mut a = prev.to_vec();
    let mut b = curr.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDrift {
    pub feature: String,
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    /// Statistics of the features evaluated, in schema order. With early
    /// exit this stops at the feature that pushed the sum past the threshold.
    pub per_feature: Vec<FeatureDrift>,
    pub accumulated: f64,
    pub threshold: f64,
    pub drift_detected: bool,
    pub early_exit: bool,
    pub batch_pair: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evaluation {
    /// Stop once the running sum exceeds the threshold.
    EarlyExit,
    /// Evaluate every feature (in parallel).
    Full,
}

fn column<'a>(
    batch: &'a [Instance],
    feature: &'a str,
    which: &'static str,
) -> Result<Vec<f64>, DriftError> {
    batch
        .iter()
        .map(|x| {
            x.get(feature).ok_or_else(|| DriftError::SchemaMismatch {
                feature: feature.to_string(),
                batch: which,
            })
        })
        .collect()
}

fn feature_statistic(
    prev: &[Instance],
    curr: &[Instance],
    feature: &str,
) -> Result<f64, DriftError> {
    ks_statistic(&column(prev, feature, "previous")?, &column(curr, feature, "current")?)
}

/// Summed per-feature KS drift between two train batches. Drift is flagged
/// when the sum over `active` features strictly exceeds `threshold`.
pub fn detect(
    prev: &[Instance],
    curr: &[Instance],
    active: &[String],
    threshold: f64,
    evaluation: Evaluation,
) -> Result<DriftReport, DriftError> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(DriftError::InvalidThreshold(threshold));
    }
    let mut per_feature = Vec::with_capacity(active.len());
    let mut accumulated = 0.0;
    let mut early_exit = false;
    match evaluation {
        Evaluation::EarlyExit => {
            for (k, f) in active.iter().enumerate() {
                let statistic = feature_statistic(prev, curr, f)?;
                accumulated += statistic;
                per_feature.push(FeatureDrift {
                    feature: f.clone(),
                    statistic,
                });
                if accumulated > threshold {
                    early_exit = k + 1 < active.len();
                    break;
                }
            }
        }
        Evaluation::Full => {
            let stats: Vec<f64> = active
                .par_iter()
                .map(|f| feature_statistic(prev, curr, f))
                .collect::<Result<_, _>>()?;
            for (f, statistic) in active.iter().zip(stats) {
                accumulated += statistic;
                per_feature.push(FeatureDrift {
                    feature: f.clone(),
                    statistic,
                });
            }
        }
    }
    Ok(DriftReport {
        per_feature,
        accumulated,
        threshold,
        drift_detected: accumulated > threshold,
        early_exit,
        batch_pair: None,
    })
}
