use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::forest::Instance;

use super::DataError;

/// Thresholds of the threshold-sum concepts, cycled at each drift point.
pub const SUM_THRESHOLDS: [f64; 4] = [8.0, 9.0, 7.0, 9.5];
/// Offset added to the relevant features under each concept, so concept
/// changes are visible in the feature distributions as well as the labels.
pub const SUM_OFFSETS: [f64; 4] = [0.0, 2.0, 1.0, 3.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Features `x0`, `x1` are uniform on `[o, o + 10]` and distractors on
    /// `[0, 10]`; the label is 1 iff `x0 + x1 > θ + 2o` for the current
    /// concept's threshold `θ` and offset `o`.
    ThresholdSum { n_distractors: usize },
    /// Feature `j` is normal with unit variance and mean `μ + y·sep_j`,
    /// where `μ` grows by `shift` at every drift point.
    DriftingGaussian { separations: Vec<f64>, shift: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub generator: GeneratorKind,
    pub n_instances: usize,
    #[serde(default)]
    pub drift_points: Vec<usize>,
    /// Probability of flipping each label.
    #[serde(default)]
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn feature_names(&self) -> Vec<String> {
        let d = match &self.generator {
            GeneratorKind::ThresholdSum { n_distractors } => 2 + n_distractors,
            GeneratorKind::DriftingGaussian { separations, .. } => separations.len(),
        };
        (0..d).map(|j| format!("x{j}")).collect()
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_instances == 0 {
            out.push("n_instances must be positive".to_string());
        }
        if !(0.0..=1.0).contains(&self.noise) {
            out.push(format!("noise must lie in [0, 1], got {}", self.noise));
        }
        if self.drift_points.windows(2).any(|w| w[0] >= w[1]) {
            out.push("drift points must be strictly increasing".to_string());
        }
        if let GeneratorKind::DriftingGaussian { separations, shift } = &self.generator {
            if separations.is_empty() {
                out.push("drifting_gaussian needs at least one feature".to_string());
            }
            if separations.iter().chain([shift]).any(|v| !v.is_finite()) {
                out.push("separations and shift must be finite".to_string());
            }
        }
        out
    }
}

/// Deterministic labeled stream for `spec`.
pub fn generate(spec: &SyntheticSpec) -> Result<Vec<Instance>, DataError> {
    let v = spec.violations();
    if !v.is_empty() {
        return Err(DataError::InvalidSpec(v.join("; ")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let names = spec.feature_names();
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = Vec::with_capacity(spec.n_instances);
    for t in 0..spec.n_instances {
        let concept = spec.drift_points.iter().filter(|&&p| p <= t).count();
        let (values, label) = match &spec.generator {
            GeneratorKind::ThresholdSum { .. } => {
                let o = SUM_OFFSETS[concept % 4];
                let values: Vec<f64> = (0..names.len())
                    .map(|j| rng.random_range(0.0..10.0) + if j < 2 { o } else { 0.0 })
                    .collect();
                let label = values[0] + values[1] > SUM_THRESHOLDS[concept % 4] + 2.0 * o;
                (values, label)
            }
            GeneratorKind::DriftingGaussian { separations, shift } => {
                let label = rng.random_bool(0.5);
                let mu = *shift * concept as f64;
                let values = separations
                    .iter()
                    .map(|sep| mu + if label { *sep } else { 0.0 } + unit.sample(&mut rng))
                    .collect();
                (values, label)
            }
        };
        let flip = rng.random::<f64>() < spec.noise;
        out.push(Instance {
            features: names.iter().cloned().zip(values).collect(),
            label: (label ^ flip) as u8,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{detect, Evaluation};

    fn sum_spec(drift_points: Vec<usize>, noise: f64) -> SyntheticSpec {
        SyntheticSpec {
            generator: GeneratorKind::ThresholdSum { n_distractors: 2 },
            n_instances: 4000,
            drift_points,
            noise,
            seed: 7,
        }
    }

    #[test]
    fn noiseless_stream_is_separated_by_the_concept() {
        let s = generate(&sum_spec(vec![], 0.0)).unwrap();
        assert!(s.iter().all(|x| (x.get("x0").unwrap() + x.get("x1").unwrap() > 8.0) == (x.label == 1)));
        assert_eq!(s[0].features.len(), 4);
    }

    #[test]
    fn noise_rate_matches() {
        let clean = generate(&sum_spec(vec![], 0.0)).unwrap();
        let noisy = generate(&sum_spec(vec![], 0.1)).unwrap();
        let agree = clean.iter().zip(&noisy).filter(|(a, b)| a.label == b.label).count() as f64 / 4000.0;
        assert!((agree - 0.9).abs() < 0.02, "{agree}");
    }

    #[test]
    fn drift_is_visible_to_ks() {
        let s = generate(&sum_spec(vec![2000], 0.0)).unwrap();
        let f = vec!["x0".to_string(), "x1".to_string(), "x2".to_string(), "x3".to_string()];
        let inside = detect(&s[1000..1500], &s[1500..2000], &f, 100.0, Evaluation::Full).unwrap();
        let across = detect(&s[1500..2000], &s[2000..2500], &f, 100.0, Evaluation::Full).unwrap();
        assert!(across.accumulated > inside.accumulated);
    }

    #[test]
    fn deterministic_and_validated() {
        let spec = SyntheticSpec {
            generator: GeneratorKind::DriftingGaussian { separations: vec![1.0, 0.5], shift: 1.0 },
            n_instances: 100,
            drift_points: vec![50],
            noise: 0.0,
            seed: 3,
        };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let bad = SyntheticSpec { drift_points: vec![50, 50], ..spec.clone() };
        assert!(generate(&bad).is_err());
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SyntheticSpec>(&json).unwrap(), spec);
    }
}
