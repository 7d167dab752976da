use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataError;

/// Features that become available at `epoch` (batch index).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub epoch: usize,
    pub features: Vec<String>,
}

/// Chronological feature arrivals. Features accumulate: once added a feature
/// stays active.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureSchedule(pub Vec<ScheduleStep>);

impl FeatureSchedule {
    /// Every feature active from epoch 0.
    pub fn all_at_start(features: &[String]) -> Self {
        Self(vec![ScheduleStep {
            epoch: 0,
            features: features.to_vec(),
        }])
    }

    /// First 3 features at epoch 0, one more at epoch 10, two more at 20.
    /// Shorter lists are cut off where they run out.
    pub fn staged(features: &[String]) -> Self {
        let mut steps = Vec::new();
        for (epoch, lo, hi) in [(0, 0, 3), (10, 3, 4), (20, 4, 6)] {
            let hi = hi.min(features.len());
            if lo < hi {
                steps.push(ScheduleStep {
                    epoch,
                    features: features[lo..hi].to_vec(),
                });
            }
        }
        Self(steps)
    }

    /// Active features at `epoch`, in order of arrival.
    pub fn active_at(&self, epoch: usize) -> Vec<String> {
        let mut steps: Vec<&ScheduleStep> = self.0.iter().filter(|s| s.epoch <= epoch).collect();
        steps.sort_by_key(|s| s.epoch);
        steps.into_iter().flat_map(|s| s.features.iter().cloned()).collect()
    }

    pub fn features(&self) -> Vec<String> {
        self.active_at(usize::MAX)
    }

    /// Every violation against the given feature universe.
    pub fn violations(&self, universe: &[String]) -> Vec<String> {
        let mut out = Vec::new();
        if self.0.is_empty() {
            out.push("schedule is empty".to_string());
        }
        if !self.0.iter().any(|s| s.epoch == 0 && !s.features.is_empty()) {
            out.push("schedule activates no feature at epoch 0".to_string());
        }
        let known: HashSet<&str> = universe.iter().map(String::as_str).collect();
        let mut seen = HashSet::new();
        for step in &self.0 {
            for f in &step.features {
                if !known.contains(f.as_str()) {
                    out.push(format!("schedule feature `{f}` (epoch {}) is not a dataset feature", step.epoch));
                }
                if !seen.insert(f.as_str()) {
                    out.push(format!("schedule lists feature `{f}` more than once"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub name: String,
    /// Numeric feature columns, in schema order.
    pub features: Vec<String>,
    pub label: String,
    /// Raw label value to class.
    pub label_map: BTreeMap<String, u8>,
    /// Columns present in the file but not used.
    #[serde(default)]
    pub ignored_columns: Vec<String>,
    /// Accept any undeclared column instead of rejecting the header.
    #[serde(default)]
    pub allow_extra_columns: bool,
    /// Cell values read as missing, besides the empty cell.
    #[serde(default)]
    pub missing_tokens: Vec<String>,
    #[serde(default)]
    pub schedule: FeatureSchedule,
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

impl DatasetSchema {
    pub fn from_json(text: &str) -> Result<Self, DataError> {
        let s: Self = serde_json::from_str(text).map_err(|e| DataError::Schema(e.to_string()))?;
        let v = s.violations();
        if v.is_empty() {
            Ok(s)
        } else {
            Err(DataError::Schema(v.join("; ")))
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, DataError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.features.is_empty() {
            out.push("schema declares no features".to_string());
        }
        if self.features.contains(&self.label) {
            out.push(format!("label column `{}` is also listed as a feature", self.label));
        }
        let mut seen = HashSet::new();
        for f in &self.features {
            if !seen.insert(f) {
                out.push(format!("feature `{f}` declared more than once"));
            }
        }
        if self.label_map.is_empty() {
            out.push("label_map is empty".to_string());
        }
        if let Some((k, v)) = self.label_map.iter().find(|(_, v)| **v > 1) {
            out.push(format!("label `{k}` maps to {v}; classes must be 0 or 1"));
        }
        if !self.schedule.0.is_empty() {
            out.extend(self.schedule.violations(&self.features));
        }
        out
    }

    /// The schedule declared by the schema, or every feature from epoch 0.
    pub fn default_schedule(&self) -> FeatureSchedule {
        if self.schedule.0.is_empty() {
            FeatureSchedule::all_at_start(&self.features)
        } else {
            self.schedule.clone()
        }
    }

    pub fn builtin(name: &str) -> Result<Self, DataError> {
        match name {
            "electricity" => Ok(Self::electricity()),
            "weather" => Ok(Self::weather()),
            "network" => Ok(Self::network()),
            other => Err(DataError::UnknownDataset(other.to_string())),
        }
    }

    pub fn electricity() -> Self {
        let features = strings(&["period", "transfer", "nswprice", "vicprice", "vicdemand", "nswdemand"]);
        Self {
            name: "electricity".into(),
            schedule: FeatureSchedule::staged(&features),
            features,
            label: "class".into(),
            label_map: [("UP".to_string(), 1), ("DOWN".to_string(), 0)].into(),
            ignored_columns: strings(&["date", "day"]),
            allow_extra_columns: false,
            missing_tokens: vec![],
        }
    }

    pub fn weather() -> Self {
        let features = strings(&["MinTemp", "WindGustSpeed", "Evaporation", "MaxTemp", "Rainfall", "Sunshine"]);
        Self {
            name: "weather".into(),
            schedule: FeatureSchedule::staged(&features),
            features,
            label: "RainTomorrow".into(),
            label_map: [("Yes".to_string(), 1), ("No".to_string(), 0)].into(),
            ignored_columns: vec![],
            allow_extra_columns: true,
            missing_tokens: strings(&["NA"]),
        }
    }

    pub fn network() -> Self {
        let features = strings(&[
            "mac_dl_mcs",
            "phy_ul_pusch_sinr",
            "phy_ul_pucch_sinr",
            "phy_ul_pusch_rssi",
            "mac_dl_cqi",
            "phy_ul_pucch_rssi",
        ]);
        Self {
            name: "network".into(),
            schedule: FeatureSchedule::staged(&features),
            features,
            label: "label".into(),
            label_map: [
                ("benign".to_string(), 0),
                ("attack".to_string(), 1),
                ("0".to_string(), 0),
                ("1".to_string(), 1),
            ]
            .into(),
            ignored_columns: vec![],
            allow_extra_columns: true,
            missing_tokens: vec![],
        }
    }
}
