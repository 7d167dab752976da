//! Fixtures shared by the criterion benches.

use dafi_core::data::{generate, GeneratorKind, SyntheticSpec};
use dafi_core::{ArfEnsemble, ArfParams, Instance};

pub struct Fixture {
    pub forest: ArfEnsemble,
    pub stream: Vec<Instance>,
    pub features: Vec<String>,
}

/// Forest of `n_trees` trained on a noisy threshold stream with
/// `n_features` features (two relevant, the rest distractors).
pub fn fixture(n_features: usize, n_trees: usize, n_instances: usize, seed: u64) -> Fixture {
    assert!(n_features >= 2);
    let spec = SyntheticSpec {
        generator: GeneratorKind::ThresholdSum { n_distractors: n_features - 2 },
        n_instances,
        drift_points: vec![],
        noise: 0.05,
        seed,
    };
    let stream = generate(&spec).expect("valid spec");
    let mut forest = ArfEnsemble::new(ArfParams { n_trees, seed, ..ArfParams::default() }).expect("valid params");
    for x in &stream {
        forest.learn_one(x).expect("complete instance");
    }
    Fixture { forest, stream, features: spec.feature_names() }
}
