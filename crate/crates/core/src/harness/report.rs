use serde::{Deserialize, Serialize};

use crate::drift::DriftReport;
use crate::explain::ImportanceVector;

use super::metrics::{mean_defined, saved_runtime_pct, SpearmanScope};
use super::Method;

/// Settings echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub dataset: String,
    pub seed: u64,
    pub n_trees: usize,
    pub n_samples: usize,
    pub eta: f64,
    pub theta: f64,
    pub n_batches: usize,
    pub train_fraction: f64,
    pub background_size: usize,
    pub methods: Vec<Method>,
    pub spearman_scope: SpearmanScope,
    pub workers: usize,
    pub timing_seed_free: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodBatch {
    pub method: Method,
    pub runtime_s: f64,
    /// Batch-level saving against this batch's SHAP runtime.
    pub saved_pct: Option<f64>,
    pub saved_pct_raw: Option<f64>,
    pub topk_set: Option<f64>,
    pub topk_exact: Option<f64>,
    pub spearman: Option<f64>,
    pub mean_k: Option<f64>,
    /// Samples with a defined top-k agreement.
    pub n_scored: usize,
    /// Samples whose SHAP reference was all zero.
    pub n_degenerate: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<ImportanceVector>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub active_features: Vec<String>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub drift: Option<DriftReport>,
    pub drift_flag: bool,
    /// Runtime of the SHAP reference explanations.
    pub shap_runtime_s: f64,
    pub methods: Vec<MethodBatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub runtime_s: f64,
    pub saved_pct: Option<f64>,
    pub saved_pct_raw: Option<f64>,
    pub topk_set: Option<f64>,
    pub topk_exact: Option<f64>,
    pub spearman: Option<f64>,
    pub n_degenerate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean_train_accuracy: f64,
    pub mean_test_accuracy: f64,
    pub drift_batches: usize,
    pub shap_runtime_s: f64,
    pub methods: Vec<MethodSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ConfigEcho,
    pub n_instances: usize,
    pub dropped_rows: usize,
    pub batches: Vec<BatchRecord>,
    pub summary: Summary,
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len();
    if n == 0 {
        0.0
    } else {
        xs.sum::<f64>() / n as f64
    }
}

/// Aggregate batch records: runtimes are summed and the saving is taken on
/// the totals; agreement metrics are averaged over batches where defined.
pub fn summarize(batches: &[BatchRecord], methods: &[Method]) -> Summary {
    let shap_total: f64 = batches.iter().map(|b| b.shap_runtime_s).sum();
    let methods = methods
        .iter()
        .map(|&m| {
            let rows: Vec<&MethodBatch> = batches
                .iter()
                .filter_map(|b| b.methods.iter().find(|r| r.method == m))
                .collect();
            let runtime_s: f64 = rows.iter().map(|r| r.runtime_s).sum();
            let saved = saved_runtime_pct(runtime_s, shap_total);
            MethodSummary {
                method: m,
                runtime_s,
                saved_pct: saved.map(|s| s.pct),
                saved_pct_raw: saved.map(|s| s.raw),
                topk_set: mean_defined(rows.iter().map(|r| r.topk_set)),
                topk_exact: mean_defined(rows.iter().map(|r| r.topk_exact)),
                spearman: mean_defined(rows.iter().map(|r| r.spearman)),
                n_degenerate: rows.iter().map(|r| r.n_degenerate).sum(),
            }
        })
        .collect();
    Summary {
        mean_train_accuracy: mean(batches.iter().map(|b| b.train_accuracy)),
        mean_test_accuracy: mean(batches.iter().map(|b| b.test_accuracy)),
        drift_batches: batches.iter().filter(|b| b.drift_flag).count(),
        shap_runtime_s: shap_total,
        methods,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn to_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One row per batch and method.
    pub fn batches_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "batch",
            "method",
            "n_features",
            "drift_flag",
            "accumulated_drift",
            "runtime_s",
            "saved_pct",
            "topk_set",
            "topk_exact",
            "topk_spearman",
            "mean_k",
            "n_degenerate",
        ])
        .expect("in-memory write");
        for b in &self.batches {
            for m in &b.methods {
                w.write_record([
                    b.index.to_string(),
                    m.method.to_string(),
                    b.active_features.len().to_string(),
                    b.drift_flag.to_string(),
                    opt(b.drift.as_ref().map(|d| d.accumulated)),
                    m.runtime_s.to_string(),
                    opt(m.saved_pct),
                    opt(m.topk_set),
                    opt(m.topk_exact),
                    opt(m.spearman),
                    opt(m.mean_k),
                    m.n_degenerate.to_string(),
                ])
                .expect("in-memory write");
            }
        }
        to_string(w)
    }

    pub fn accuracy_curve_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["batch", "n_features", "train_accuracy", "test_accuracy"])
            .expect("in-memory write");
        for b in &self.batches {
            w.write_record([
                b.index.to_string(),
                b.active_features.len().to_string(),
                b.train_accuracy.to_string(),
                b.test_accuracy.to_string(),
            ])
            .expect("in-memory write");
        }
        to_string(w)
    }
}
