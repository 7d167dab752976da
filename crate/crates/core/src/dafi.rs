//! Drift-aware selection between the two importance engines.
//!
//! One drift decision is made per batch from the previous and current train
//! batches. When the summed KS drift exceeds η every target of the batch is
//! explained with exact Shapley values; otherwise with path-based MDI.

use std::time::{Duration, Instant};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drift::{detect, DriftError, DriftReport, Evaluation};
use crate::explain::{
    shap_importance, CoalitionEvaluator, ExplainError, ImportanceVector, MdiExplainer,
    MAX_EXACT_FEATURES,
};
use crate::forest::{ArfEnsemble, Instance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DafiError {
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error("invalid DAFI configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DafiConfig {
    /// Drift threshold η on the summed per-feature KS statistics.
    pub eta: f64,
    pub feature_budget: usize,
    pub background_size: usize,
    pub n_samples: usize,
}

impl Default for DafiConfig {
    fn default() -> Self {
        Self {
            eta: 1.0,
            feature_budget: MAX_EXACT_FEATURES,
            background_size: 64,
            n_samples: 50,
        }
    }
}

impl DafiConfig {
    pub fn validate(&self) -> Result<(), DafiError> {
        if !(self.eta > 0.0) {
            return Err(DafiError::InvalidConfig(format!("eta must be > 0, got {}", self.eta)));
        }
        if self.n_samples == 0 {
            return Err(DafiError::InvalidConfig("n_samples must be at least 1".into()));
        }
        if self.background_size == 0 {
            return Err(DafiError::InvalidConfig("background_size must be at least 1".into()));
        }
        if self.feature_budget == 0 || self.feature_budget > MAX_EXACT_FEATURES {
            return Err(DafiError::InvalidConfig(format!(
                "feature_budget must be in 1..={MAX_EXACT_FEATURES}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchExplanation {
    /// `None` for the first batch, which has no predecessor.
    pub drift: Option<DriftReport>,
    pub drift_flag: bool,
    pub vectors: Vec<ImportanceVector>,
    /// Wall clock of the drift decision plus the explanations.
    pub elapsed: Duration,
}

/// Uniform sample of `size` rows without replacement (all rows if fewer),
/// kept in stream order.
pub fn sample_rows<R: Rng + ?Sized>(rows: &[Instance], size: usize, rng: &mut R) -> Vec<Instance> {
    if rows.len() <= size {
        return rows.to_vec();
    }
    let mut picked = index::sample(rng, rows.len(), size).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| rows[i].clone()).collect()
}

fn fan_out<T, F>(targets: &[Instance], pool: Option<&ThreadPool>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&Instance) -> T + Sync + Send,
{
    match pool {
        Some(p) => p.install(|| targets.par_iter().map(&f).collect()),
        None => targets.iter().map(f).collect(),
    }
}

/// SHAP importance for every target.
pub fn explain_shap(
    ensemble: &ArfEnsemble,
    targets: &[Instance],
    background: &[Instance],
    active: &[String],
    feature_budget: usize,
    pool: Option<&ThreadPool>,
) -> Result<Vec<ImportanceVector>, DafiError> {
    if active.len() > feature_budget.min(MAX_EXACT_FEATURES) {
        return Err(ExplainError::FeatureBudget {
            features: active.len(),
            budget: feature_budget.min(MAX_EXACT_FEATURES),
        }
        .into());
    }
    fan_out(targets, pool, |x| {
        let eval = CoalitionEvaluator::for_ensemble(ensemble, x, background, active)?;
        shap_importance(&eval, active, feature_budget)
    })
    .into_iter()
    .map(|r| r.map_err(DafiError::from))
    .collect()
}

/// MDI importance for every target.
pub fn explain_mdi(
    ensemble: &ArfEnsemble,
    targets: &[Instance],
    active: &[String],
    pool: Option<&ThreadPool>,
) -> Vec<ImportanceVector> {
    let mdi = MdiExplainer::new(ensemble, active);
    fan_out(targets, pool, |x| mdi.explain(x))
}

/// Drift indicator for a batch. The first batch (no predecessor) counts as
/// drifted.
pub fn drift_decision(
    prev_train: Option<&[Instance]>,
    curr_train: &[Instance],
    active: &[String],
    eta: f64,
) -> Result<(Option<DriftReport>, bool), DafiError> {
    match prev_train {
        None => Ok((None, true)),
        Some(prev) => {
            let report = detect(prev, curr_train, active, eta, Evaluation::EarlyExit)?;
            let flag = report.drift_detected;
            Ok((Some(report), flag))
        }
    }
}

/// Explain `targets` with SHAP if the train batches drifted, MDI otherwise.
#[allow(clippy::too_many_arguments)]
pub fn explain_batch(
    ensemble: &ArfEnsemble,
    prev_train: Option<&[Instance]>,
    curr_train: &[Instance],
    background: &[Instance],
    targets: &[Instance],
    active: &[String],
    cfg: &DafiConfig,
    pool: Option<&ThreadPool>,
) -> Result<BatchExplanation, DafiError> {
    let start = Instant::now();
    let (drift, drift_flag) = drift_decision(prev_train, curr_train, active, cfg.eta)?;
    let vectors = if drift_flag {
        explain_shap(ensemble, targets, background, active, cfg.feature_budget, pool)?
    } else {
        explain_mdi(ensemble, targets, active, pool)
    };
    let elapsed = start.elapsed();
    let vectors = vectors
        .into_iter()
        .map(|v| v.with_drift_flag(drift_flag))
        .collect();
    Ok(BatchExplanation {
        drift,
        drift_flag,
        vectors,
        elapsed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::ExplainMethod;
    use crate::forest::ArfParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn features() -> Vec<String> {
        vec!["a".into(), "b".into(), "c".into()]
    }

    fn stream(n: usize, shift: f64, seed: u64) -> Vec<Instance> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let a: f64 = rng.random::<f64>() + shift;
                let b: f64 = rng.random();
                let c: f64 = rng.random();
                Instance::from_pairs([("a", a), ("b", b), ("c", c)], (a - shift + 0.3 * b > 0.6) as u8)
            })
            .collect()
    }

    fn trained(data: &[Instance]) -> ArfEnsemble {
        let mut e = ArfEnsemble::new(ArfParams {
            n_trees: 3,
            ..ArfParams::default()
        })
        .unwrap();
        for x in data {
            e.learn_one(x).unwrap();
        }
        e
    }

    fn same_scores(a: &[ImportanceVector], b: &[ImportanceVector]) -> bool {
        a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| {
                x.method == y.method
                    && x.features == y.features
                    && x.scores.iter().zip(&y.scores).all(|(p, q)| p.to_bits() == q.to_bits())
            })
    }

    #[test]
    fn pinned_indicator_reproduces_constituent_methods() {
        let prev = stream(300, 0.0, 1);
        let curr = stream(300, 0.5, 2);
        let e = trained(&[prev.clone(), curr.clone()].concat());
        let targets = stream(8, 0.5, 3);
        let bg = &curr[..16];
        let f = features();

        let above = DafiConfig { eta: f.len() as f64 + 1.0, ..DafiConfig::default() };
        let out = explain_batch(&e, Some(&prev), &curr, bg, &targets, &f, &above, None).unwrap();
        assert!(!out.drift_flag);
        assert!(out.vectors.iter().all(|v| v.method == ExplainMethod::Mdi && !v.drift_flag));
        assert!(same_scores(&out.vectors, &explain_mdi(&e, &targets, &f, None)));

        let below = DafiConfig { eta: 1e-12, ..DafiConfig::default() };
        let out = explain_batch(&e, Some(&prev), &curr, bg, &targets, &f, &below, None).unwrap();
        assert!(out.drift_flag);
        assert!(out.vectors.iter().all(|v| v.method == ExplainMethod::Shap && v.drift_flag));
        let shap = explain_shap(&e, &targets, bg, &f, 16, None).unwrap();
        assert!(same_scores(&out.vectors, &shap));
    }

    #[test]
    fn first_batch_defaults_to_shap() {
        let curr = stream(200, 0.0, 5);
        let e = trained(&curr);
        let out = explain_batch(&e, None, &curr, &curr[..8], &curr[..2], &features(), &DafiConfig::default(), None)
            .unwrap();
        assert!(out.drift.is_none());
        assert!(out.drift_flag);
        assert_eq!(out.vectors[0].method, ExplainMethod::Shap);
    }

    #[test]
    fn parallel_fan_out_matches_sequential() {
        let data = stream(400, 0.0, 9);
        let e = trained(&data);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let f = features();
        let seq = explain_shap(&e, &data[..10], &data[..12], &f, 16, None).unwrap();
        let par = explain_shap(&e, &data[..10], &data[..12], &f, 16, Some(&pool)).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn config_guards() {
        assert!(DafiConfig { eta: 0.0, ..DafiConfig::default() }.validate().is_err());
        assert!(DafiConfig { eta: -1.0, ..DafiConfig::default() }.validate().is_err());
        assert!(DafiConfig { n_samples: 0, ..DafiConfig::default() }.validate().is_err());
        assert!(DafiConfig::default().validate().is_ok());
    }

    #[test]
    fn budget_error_propagates() {
        let data = stream(50, 0.0, 1);
        let e = trained(&data);
        let cfg = DafiConfig { feature_budget: 2, eta: 1e-9, ..DafiConfig::default() };
        let err = explain_batch(&e, None, &data, &data[..4], &data[..2], &features(), &cfg, None);
        assert!(matches!(err, Err(DafiError::Explain(ExplainError::FeatureBudget { .. }))));
    }
}
