use std::collections::HashSet;
use std::path::{Path, PathBuf};

use dafi_core::data::{DatasetSchema, FeatureSchedule, GeneratorKind, SyntheticSpec};
use dafi_core::harness::{ExperimentConfig, Method, SpearmanScope, SweepSpec};
use dafi_core::{ArfParams, DafiConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Where the instances come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetRef {
    /// A headed CSV file read with a built-in schema (`schema`) or a schema
    /// JSON file (`schema_path`).
    Csv {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schema: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schema_path: Option<PathBuf>,
    },
    Synthetic(SyntheticSpec),
}

impl DatasetRef {
    pub fn default_synthetic() -> Self {
        DatasetRef::Synthetic(SyntheticSpec {
            generator: GeneratorKind::ThresholdSum { n_distractors: 4 },
            n_instances: 20_000,
            drift_points: vec![5_000, 10_000, 15_000],
            noise: 0.1,
            seed: 42,
        })
    }

    pub fn name(&self) -> String {
        match self {
            DatasetRef::Csv { schema: Some(s), .. } => s.clone(),
            DatasetRef::Csv { path, .. } => path.display().to_string(),
            DatasetRef::Synthetic(_) => "synthetic".into(),
        }
    }

    pub fn schema(&self, base: &Path) -> Result<Option<DatasetSchema>, CliError> {
        match self {
            DatasetRef::Csv { schema, schema_path, .. } => match (schema, schema_path) {
                (Some(name), None) => Ok(Some(DatasetSchema::builtin(name).map_err(|e| CliError::field("dataset.schema", e))?)),
                (None, Some(p)) => Ok(Some(
                    DatasetSchema::from_path(&resolve(base, p)).map_err(|e| CliError::field("dataset.schema_path", e))?,
                )),
                _ => Err(CliError::field(
                    "dataset",
                    "a CSV dataset needs exactly one of `schema` (built-in name) or `schema_path`",
                )),
            },
            DatasetRef::Synthetic(_) => Ok(None),
        }
    }
}

pub(crate) fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// JSON run configuration. Every field except `dataset` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetRef,
    #[serde(default = "defaults::n_batches")]
    pub n_batches: usize,
    /// Defaults to the dataset's schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<FeatureSchedule>,
    #[serde(default = "defaults::n_trees")]
    pub n_trees: usize,
    #[serde(default = "defaults::n_samples")]
    pub n_samples: usize,
    /// Defaults per dataset: 0.125 for network, 1 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default = "defaults::theta")]
    pub theta: f64,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    #[serde(default = "defaults::methods")]
    pub methods: Vec<Method>,
    #[serde(default = "defaults::background_size")]
    pub background_size: usize,
    #[serde(default)]
    pub spearman_scope: SpearmanScope,
    #[serde(default = "defaults::workers")]
    pub workers: usize,
    #[serde(default)]
    pub timing_seed_free: bool,
    #[serde(default)]
    pub record_vectors: bool,
    #[serde(default = "defaults::out")]
    pub out: PathBuf,
    /// Scaling sweep for `bench`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

mod defaults {
    use super::*;

    pub fn n_batches() -> usize {
        50
    }
    pub fn n_trees() -> usize {
        10
    }
    pub fn n_samples() -> usize {
        50
    }
    pub fn theta() -> f64 {
        0.8
    }
    pub fn seed() -> u64 {
        42
    }
    pub fn methods() -> Vec<Method> {
        Method::ALL.to_vec()
    }
    pub fn background_size() -> usize {
        64
    }
    pub fn workers() -> usize {
        1
    }
    pub fn out() -> PathBuf {
        PathBuf::from("out")
    }
}

impl RunConfig {
    pub fn new(dataset: DatasetRef) -> Self {
        Self {
            dataset,
            n_batches: defaults::n_batches(),
            schedule: None,
            n_trees: defaults::n_trees(),
            n_samples: defaults::n_samples(),
            eta: None,
            theta: defaults::theta(),
            seed: defaults::seed(),
            methods: defaults::methods(),
            background_size: defaults::background_size(),
            spearman_scope: SpearmanScope::Full,
            workers: defaults::workers(),
            timing_seed_free: false,
            record_vectors: false,
            out: defaults::out(),
            sweep: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(vec![format!("config: {e}")]))
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![format!("config: cannot read {}: {e}", path.display())]))?;
        Self::from_json(&text)
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or(match &self.dataset {
            DatasetRef::Csv { schema: Some(s), .. } if s == "network" => 0.125,
            _ => 1.0,
        })
    }

    /// Feature universe and schedule, without reading any data file.
    pub fn resolve_features(&self, base: &Path) -> Result<(Vec<String>, FeatureSchedule), CliError> {
        let (universe, default) = match &self.dataset {
            DatasetRef::Synthetic(spec) => {
                let f = spec.feature_names();
                let s = FeatureSchedule::staged(&f);
                (f, s)
            }
            DatasetRef::Csv { .. } => {
                let schema = self.schema(base)?.expect("csv datasets carry a schema");
                let s = schema.default_schedule();
                (schema.features, s)
            }
        };
        Ok((universe, self.schedule.clone().unwrap_or(default)))
    }

    pub fn schema(&self, base: &Path) -> Result<Option<DatasetSchema>, CliError> {
        self.dataset.schema(base)
    }

    /// Every problem with the configuration, each naming its field. Data
    /// files are checked for existence only.
    pub fn violations(&self, base: &Path) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.eta() > 0.0) || !self.eta().is_finite() {
            out.push(format!("eta: must be a finite number > 0, got {}", self.eta()));
        }
        if self.n_trees == 0 {
            out.push("n_trees: must be at least 1".into());
        }
        if self.n_samples == 0 {
            out.push("n_samples: must be at least 1".into());
        }
        if self.n_batches == 0 {
            out.push("n_batches: must be at least 1".into());
        }
        if self.background_size == 0 {
            out.push("background_size: must be at least 1".into());
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            out.push(format!("theta: must lie in (0, 1], got {}", self.theta));
        }
        if self.workers == 0 {
            out.push("workers: must be at least 1".into());
        }
        if self.methods.is_empty() {
            out.push("methods: must list at least one of SHAP, MDI, DAFI".into());
        }
        let mut seen = HashSet::new();
        for m in &self.methods {
            if !seen.insert(m) {
                out.push(format!("methods: {m} listed more than once"));
            }
        }
        match &self.dataset {
            DatasetRef::Synthetic(spec) => {
                out.extend(spec.violations().into_iter().map(|v| format!("dataset: {v}")));
            }
            DatasetRef::Csv { path, .. } => {
                let p = resolve(base, path);
                if !p.is_file() {
                    out.push(format!("dataset.path: file {} does not exist", p.display()));
                }
            }
        }
        match self.resolve_features(base) {
            Ok((universe, schedule)) => {
                out.extend(schedule.violations(&universe).into_iter().map(|v| format!("schedule: {v}")));
                let n = schedule.features().len();
                if n > dafi_core::explain::MAX_EXACT_FEATURES {
                    out.push(format!(
                        "schedule: {n} features exceed the exact Shapley budget of {}",
                        dafi_core::explain::MAX_EXACT_FEATURES
                    ));
                }
            }
            Err(CliError::Config(v)) => out.extend(v),
            Err(e) => out.push(e.to_string()),
        }
        if let Some(s) = &self.sweep {
            out.extend(s.violations().into_iter().map(|v| format!("sweep: {v}")));
        }
        out
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            dataset: self.dataset.name(),
            arf: ArfParams {
                n_trees: self.n_trees,
                seed: self.seed,
                ..ArfParams::default()
            },
            dafi: DafiConfig {
                eta: self.eta(),
                n_samples: self.n_samples,
                background_size: self.background_size,
                ..DafiConfig::default()
            },
            theta: self.theta,
            methods: self.methods.clone(),
            spearman_scope: self.spearman_scope,
            seed: self.seed,
            workers: self.workers,
            timing_seed_free: self.timing_seed_free,
            record_vectors: self.record_vectors,
        }
    }
}
