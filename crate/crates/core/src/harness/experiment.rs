use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dafi::{drift_decision, explain_batch, explain_mdi, explain_shap, sample_rows, DafiConfig};
use crate::data::mask_features;
use crate::explain::ImportanceVector;
use crate::forest::{ArfEnsemble, ArfParams, Instance};

use super::metrics::{agreement, mean_defined, saved_runtime_pct, SampleAgreement, SpearmanScope};
use super::plan::BatchPlan;
use super::report::{summarize, BatchRecord, ConfigEcho, ExperimentReport, MethodBatch};
use super::{HarnessError, Method};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub arf: ArfParams,
    pub dafi: DafiConfig,
    pub theta: f64,
    pub methods: Vec<Method>,
    pub spearman_scope: SpearmanScope,
    /// Seeds the forest and the target/background sampling.
    pub seed: u64,
    /// Explanation threads; 1 explains sequentially.
    pub workers: usize,
    /// Zero every timing field so reports are reproducible byte for byte.
    pub timing_seed_free: bool,
    /// Keep every importance vector in the report.
    pub record_vectors: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: "synthetic".into(),
            arf: ArfParams::default(),
            dafi: DafiConfig::default(),
            theta: 0.8,
            methods: Method::ALL.to_vec(),
            spearman_scope: SpearmanScope::Full,
            seed: 42,
            workers: 1,
            timing_seed_free: false,
            record_vectors: false,
        }
    }
}

impl ExperimentConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.dafi.validate() {
            out.push(e.to_string());
        }
        if self.arf.n_trees == 0 {
            out.push("n_trees must be at least 1".into());
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            out.push(format!("theta must lie in (0, 1], got {}", self.theta));
        }
        if self.methods.is_empty() {
            out.push("methods must not be empty".into());
        }
        let mut seen = HashSet::new();
        for m in &self.methods {
            if !seen.insert(m) {
                out.push(format!("method {m} listed more than once"));
            }
        }
        if self.workers == 0 {
            out.push("workers must be at least 1".into());
        }
        out
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn method_batch(
    method: Method,
    runtime: Duration,
    shap_runtime: Duration,
    shap: &[ImportanceVector],
    vectors: Vec<ImportanceVector>,
    cfg: &ExperimentConfig,
) -> Result<MethodBatch, HarnessError> {
    let per_sample: Vec<SampleAgreement> = shap
        .iter()
        .zip(&vectors)
        .map(|(s, v)| agreement(s, v, cfg.theta, cfg.spearman_scope))
        .collect::<Result<_, _>>()?;
    let (runtime_s, saved) = if cfg.timing_seed_free {
        (0.0, None)
    } else {
        let r = runtime.as_secs_f64();
        (r, saved_runtime_pct(r, shap_runtime.as_secs_f64()))
    };
    Ok(MethodBatch {
        method,
        runtime_s,
        saved_pct: saved.map(|s| s.pct),
        saved_pct_raw: saved.map(|s| s.raw),
        topk_set: mean_defined(per_sample.iter().map(|a| a.set)),
        topk_exact: mean_defined(per_sample.iter().map(|a| a.exact)),
        spearman: mean_defined(per_sample.iter().map(|a| a.spearman)),
        mean_k: mean_defined(per_sample.iter().map(|a| a.k.map(|k| k as f64))),
        n_scored: per_sample.iter().filter(|a| a.k.is_some()).count(),
        n_degenerate: per_sample.iter().filter(|a| a.k.is_none()).count(),
        vectors: cfg.record_vectors.then_some(vectors),
    })
}

fn accuracy(hits: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        hits as f64 / n as f64
    }
}

/// Run the batch protocol over `stream`. `universe` lists every feature the
/// dataset provides; the plan's schedule must stay within it.
pub fn run_experiment(
    stream: &[Instance],
    universe: &[String],
    plan: &BatchPlan,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, HarnessError> {
    let mut problems = cfg.violations();
    problems.extend(plan.schedule.violations(universe));
    if !problems.is_empty() {
        return Err(HarnessError::Config(problems.join("; ")));
    }
    let bounds = plan.bounds(stream.len())?;
    let pool = if cfg.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| HarnessError::Config(e.to_string()))?,
        )
    } else {
        None
    };
    let pool = pool.as_ref();

    let mut ensemble = ArfEnsemble::new(ArfParams {
        seed: cfg.seed,
        ..cfg.arf
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5EED_0F_BA7C4E5);
    let mut records = Vec::with_capacity(bounds.len());

    for (t, b) in bounds.iter().enumerate() {
        let active = plan.schedule.active_at(t);
        let train = mask_features(&stream[b.train()], &active)?;
        let test = mask_features(&stream[b.test()], &active)?;

        let mut hits = 0;
        for x in &train {
            hits += (ensemble.predict_one(x).class == x.label) as usize;
            ensemble.learn_one(x)?;
        }
        let train_accuracy = accuracy(hits, train.len());
        let test_hits = test
            .iter()
            .filter(|x| ensemble.predict_one(x).class == x.label)
            .count();
        let test_accuracy = accuracy(test_hits, test.len());

        let targets = sample_rows(&test, cfg.dafi.n_samples, &mut rng);
        let background = sample_rows(&train, cfg.dafi.background_size, &mut rng);

        // drift is measured on the raw batches so features that arrive this
        // batch are compared against their values in the previous one
        let prev = (t > 0).then(|| &stream[bounds[t - 1].train()]);
        let curr = &stream[b.train()];
        let (drift, drift_flag) = drift_decision(prev, curr, &active, cfg.dafi.eta)?;

        let (shap, shap_time) = timed(|| {
            explain_shap(&ensemble, &targets, &background, &active, cfg.dafi.feature_budget, pool)
        });
        let shap = shap?;

        let mut methods = Vec::with_capacity(cfg.methods.len());
        for &m in &cfg.methods {
            let (vectors, runtime) = match m {
                Method::Shap => (shap.clone(), shap_time),
                Method::Mdi => timed(|| explain_mdi(&ensemble, &targets, &active, pool)),
                Method::Dafi => {
                    let out = explain_batch(&ensemble, prev, curr, &background, &targets, &active, &cfg.dafi, pool)?;
                    (out.vectors, out.elapsed)
                }
            };
            methods.push(method_batch(m, runtime, shap_time, &shap, vectors, cfg)?);
        }

        records.push(BatchRecord {
            index: t,
            start: b.start,
            end: b.end,
            n_train: train.len(),
            n_test: test.len(),
            active_features: active,
            train_accuracy,
            test_accuracy,
            drift: drift.map(|mut d| {
                d.batch_pair = Some((t - 1, t));
                d
            }),
            drift_flag,
            shap_runtime_s: if cfg.timing_seed_free { 0.0 } else { shap_time.as_secs_f64() },
            methods,
        });
    }

    let summary = summarize(&records, &cfg.methods);
    Ok(ExperimentReport {
        config: ConfigEcho {
            dataset: cfg.dataset.clone(),
            seed: cfg.seed,
            n_trees: cfg.arf.n_trees,
            n_samples: cfg.dafi.n_samples,
            eta: cfg.dafi.eta,
            theta: cfg.theta,
            n_batches: plan.n_batches,
            train_fraction: plan.train_fraction,
            background_size: cfg.dafi.background_size,
            methods: cfg.methods.clone(),
            spearman_scope: cfg.spearman_scope,
            workers: cfg.workers,
            timing_seed_free: cfg.timing_seed_free,
        },
        n_instances: stream.len(),
        dropped_rows: 0,
        batches: records,
        summary,
    })
}
