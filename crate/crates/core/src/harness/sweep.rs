use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dafi::{explain_mdi, explain_shap, sample_rows};
use crate::data::{generate, GeneratorKind, SyntheticSpec};
use crate::explain::MAX_EXACT_FEATURES;
use crate::forest::{ArfEnsemble, ArfParams, Instance};

use super::metrics::{agreement, mean_defined, SpearmanScope};
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Features,
    Trees,
}

/// Scaling sweep over feature counts (at `base_trees`) and tree counts (at
/// `base_features`) on a threshold-sum stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub feature_counts: Vec<usize>,
    pub tree_counts: Vec<usize>,
    pub base_features: usize,
    pub base_trees: usize,
    pub n_instances: usize,
    pub n_samples: usize,
    pub background_size: usize,
    pub theta: f64,
    pub seed: u64,
    /// Explanation timings are the minimum over this many repetitions.
    pub repeats: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            feature_counts: vec![2, 3, 4, 5, 6],
            tree_counts: vec![1, 10, 50],
            base_features: 4,
            base_trees: 10,
            n_instances: 2000,
            n_samples: 50,
            background_size: 64,
            theta: 0.8,
            seed: 42,
            repeats: 5,
        }
    }
}

impl SweepSpec {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.feature_counts.is_empty() && self.tree_counts.is_empty() {
            out.push("sweep lists neither feature counts nor tree counts".into());
        }
        for &d in self.feature_counts.iter().chain([&self.base_features]) {
            if !(2..=MAX_EXACT_FEATURES).contains(&d) {
                out.push(format!("feature count {d} outside 2..={MAX_EXACT_FEATURES}"));
            }
        }
        for &t in self.tree_counts.iter().chain([&self.base_trees]) {
            if t == 0 {
                out.push("tree counts must be positive".into());
            }
        }
        if self.n_instances < 10 {
            out.push("n_instances must be at least 10".into());
        }
        if self.n_samples == 0 || self.background_size == 0 || self.repeats == 0 {
            out.push("n_samples, background_size and repeats must be positive".into());
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            out.push(format!("theta must lie in (0, 1], got {}", self.theta));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis: SweepAxis,
    pub count: usize,
    pub n_features: usize,
    pub n_trees: usize,
    pub train_runtime_s: f64,
    pub shap_runtime_s: f64,
    pub mdi_runtime_s: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub topk_exact: Option<f64>,
}

/// A trained sweep point awaiting timing.
struct Prepared {
    axis: SweepAxis,
    d: usize,
    trees: usize,
    features: Vec<String>,
    ensemble: ArfEnsemble,
    targets: Vec<Instance>,
    background: Vec<Instance>,
    train_runtime: Duration,
    train_accuracy: f64,
    test_accuracy: f64,
}

fn prepare(spec: &SweepSpec, axis: SweepAxis, d: usize, trees: usize) -> Result<Prepared, HarnessError> {
    let stream = generate(&SyntheticSpec {
        generator: GeneratorKind::ThresholdSum { n_distractors: d - 2 },
        n_instances: spec.n_instances,
        drift_points: vec![],
        noise: 0.05,
        seed: spec.seed,
    })?;
    let features: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    let split = spec.n_instances * 4 / 5;
    let (train, test) = stream.split_at(split);

    let mut ensemble = ArfEnsemble::new(ArfParams {
        n_trees: trees,
        seed: spec.seed,
        ..ArfParams::default()
    })?;
    let start = Instant::now();
    let mut hits = 0;
    for x in train {
        hits += (ensemble.predict_one(x).class == x.label) as usize;
        ensemble.learn_one(x)?;
    }
    let train_runtime = start.elapsed();
    let test_hits = test.iter().filter(|x| ensemble.predict_one(x).class == x.label).count();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let targets = sample_rows(test, spec.n_samples, &mut rng);
    let background = sample_rows(train, spec.background_size, &mut rng);
    Ok(Prepared {
        axis,
        d,
        trees,
        features,
        ensemble,
        targets,
        background,
        train_runtime,
        train_accuracy: hits as f64 / train.len() as f64,
        test_accuracy: test_hits as f64 / test.len() as f64,
    })
}

fn timed<T>(best: &mut Option<Duration>, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let v = f();
    let d = start.elapsed();
    *best = Some(best.map_or(d, |b| b.min(d)));
    v
}

/// Train once per sweep point, then time SHAP and MDI on the same targets.
/// Repeats are interleaved across points (minimum kept per point) so slow
/// phases of the machine hit every point alike.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepPoint>, HarnessError> {
    let v = spec.violations();
    if !v.is_empty() {
        return Err(HarnessError::Config(v.join("; ")));
    }
    let mut prepared = Vec::new();
    for &d in &spec.feature_counts {
        prepared.push(prepare(spec, SweepAxis::Features, d, spec.base_trees)?);
    }
    for &t in &spec.tree_counts {
        prepared.push(prepare(spec, SweepAxis::Trees, spec.base_features, t)?);
    }

    let mut shap_best = vec![None; prepared.len()];
    let mut mdi_best = vec![None; prepared.len()];
    let mut results = Vec::new();
    for _ in 0..spec.repeats {
        results.clear();
        for (i, p) in prepared.iter().enumerate() {
            let shap = timed(&mut shap_best[i], || {
                explain_shap(&p.ensemble, &p.targets, &p.background, &p.features, MAX_EXACT_FEATURES, None)
            })?;
            let mdi = timed(&mut mdi_best[i], || explain_mdi(&p.ensemble, &p.targets, &p.features, None));
            results.push((shap, mdi));
        }
    }

    prepared
        .iter()
        .zip(&results)
        .enumerate()
        .map(|(i, (p, (shap, mdi)))| {
            let exact = shap
                .iter()
                .zip(mdi)
                .map(|(s, m)| agreement(s, m, spec.theta, SpearmanScope::Full).map(|a| a.exact))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SweepPoint {
                axis: p.axis,
                count: if p.axis == SweepAxis::Features { p.d } else { p.trees },
                n_features: p.d,
                n_trees: p.trees,
                train_runtime_s: p.train_runtime.as_secs_f64(),
                shap_runtime_s: shap_best[i].expect("repeats > 0").as_secs_f64(),
                mdi_runtime_s: mdi_best[i].expect("repeats > 0").as_secs_f64(),
                train_accuracy: p.train_accuracy,
                test_accuracy: p.test_accuracy,
                topk_exact: mean_defined(exact),
            })
        })
        .collect()
}

/// `bench.csv` rows.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "axis",
        "count",
        "n_features",
        "n_trees",
        "train_runtime_s",
        "shap_runtime_s",
        "mdi_runtime_s",
        "train_accuracy",
        "test_accuracy",
        "topk_exact",
    ])
    .expect("in-memory write");
    for p in points {
        w.write_record([
            match p.axis {
                SweepAxis::Features => "features".to_string(),
                SweepAxis::Trees => "trees".to_string(),
            },
            p.count.to_string(),
            p.n_features.to_string(),
            p.n_trees.to_string(),
            p.train_runtime_s.to_string(),
            p.shap_runtime_s.to_string(),
            p.mdi_runtime_s.to_string(),
            p.train_accuracy.to_string(),
            p.test_accuracy.to_string(),
            p.topk_exact.map(|v| v.to_string()).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}
