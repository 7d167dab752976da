use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::ForestError;

/// Class identifier. Only binary problems are exercised, so labels are 0 or 1.
pub type Label = u8;

pub const N_CLASSES: usize = 2;

/// One streamed sample: a sparse map of named numeric features plus its label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub features: BTreeMap<String, f64>,
    pub label: Label,
}

impl Instance {
    pub fn new(features: BTreeMap<String, f64>, label: Label) -> Self {
        Self { features, label }
    }

    pub fn from_pairs<'a, I>(pairs: I, label: Label) -> Self
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let features = pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        Self { features, label }
    }

    pub fn get(&self, feature: &str) -> Option<f64> {
        self.features.get(feature).copied()
    }

    /// Copy of this instance restricted to `active` keys. Keys missing from
    /// the instance stay missing.
    pub fn masked(&self, active: &[String]) -> Instance {
        let features = active
            .iter()
            .filter_map(|k| self.features.get(k).map(|v| (k.clone(), *v)))
            .collect();
        Instance {
            features,
            label: self.label,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), ForestError> {
        if self.features.is_empty() {
            return Err(ForestError::MalformedInstance(
                "instance carries no features".into(),
            ));
        }
        if self.label as usize >= N_CLASSES {
            return Err(ForestError::MalformedInstance(format!(
                "label {} outside the binary class set",
                self.label
            )));
        }
        if let Some((k, v)) = self.features.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ForestError::MalformedInstance(format!(
                "feature `{k}` has non-finite value {v}"
            )));
        }
        Ok(())
    }
}

/// Maps feature names to dense column indices. Columns are append-only, so
/// an index handed out once stays valid for the lifetime of the ensemble.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureRegistry {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl FeatureRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn register(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn register_all(&mut self, x: &Instance) {
        for k in x.features.keys() {
            self.register(k);
        }
    }

    /// Dense row over the registered columns. Absent or unregistered
    /// features are NaN, which every tree treats as missing.
    pub fn dense(&self, x: &Instance) -> Vec<f64> {
        let mut row = vec![f64::NAN; self.names.len()];
        for (k, v) in &x.features {
            if let Some(&i) = self.index.get(k) {
                row[i] = *v;
            }
        }
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_values() {
        let x = Instance::from_pairs([("a", f64::NAN)], 0);
        assert!(matches!(x.validate(), Err(ForestError::MalformedInstance(_))));
        let x = Instance::from_pairs([("a", f64::INFINITY)], 1);
        assert!(x.validate().is_err());
        let x = Instance::from_pairs([("a", 1.0)], 2);
        assert!(x.validate().is_err());
        assert!(Instance::from_pairs([], 0).validate().is_err());
    }

    #[test]
    fn registry_is_append_only() {
        let mut reg = FeatureRegistry::new();
        assert_eq!(reg.register("b"), 0);
        assert_eq!(reg.register("a"), 1);
        assert_eq!(reg.register("b"), 0);
        let row = reg.dense(&Instance::from_pairs([("a", 2.0), ("zz", 1.0)], 0));
        assert!(row[0].is_nan());
        assert_eq!(row[1], 2.0);
    }

    #[test]
    fn masking_keeps_requested_keys_only() {
        let x = Instance::from_pairs([("a", 1.0), ("b", 2.0), ("c", 3.0)], 1);
        let m = x.masked(&["c".into(), "a".into(), "q".into()]);
        assert_eq!(m.features.len(), 2);
        assert_eq!(m.get("c"), Some(3.0));
        assert_eq!(m.label, 1);
    }
}
