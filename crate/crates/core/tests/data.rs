use dafi_core::data::{generate, mask_features, read_csv, write_csv, DatasetSchema, GeneratorKind, SyntheticSpec};
use dafi_core::forest::Instance;
use proptest::prelude::*;

fn schema() -> DatasetSchema {
    DatasetSchema::from_json(r#"{"name":"t","features":["a","b","c"],"label":"y","label_map":{"1":1,"0":0}}"#).unwrap()
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3f64..1e3,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec((finite(), finite(), finite(), any::<bool>()), 1..30)) {
        let xs: Vec<Instance> = rows
            .iter()
            .map(|&(a, b, c, y)| Instance::from_pairs([("a", a), ("b", b), ("c", c)], y as u8))
            .collect();
        let mut buf = Vec::new();
        write_csv(&mut buf, &schema(), &xs).unwrap();
        let back = read_csv(buf.as_slice(), &schema()).unwrap();
        prop_assert_eq!(back.dropped, 0);
        prop_assert_eq!(back.instances.len(), xs.len());
        for (x, y) in xs.iter().zip(&back.instances) {
            prop_assert_eq!(x.label, y.label);
            for (k, v) in &x.features {
                prop_assert_eq!(v.to_bits(), y.get(k).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn mask_commutes_with_batching(seed in any::<u64>(), cut in 1usize..99, k in 1usize..4) {
        let s = generate(&SyntheticSpec {
            generator: GeneratorKind::ThresholdSum { n_distractors: 2 },
            n_instances: 100,
            drift_points: vec![],
            noise: 0.1,
            seed,
        }).unwrap();
        let active: Vec<String> = (0..k).map(|j| format!("x{j}")).collect();
        let masked = mask_features(&s, &active).unwrap();
        let (a, b) = s.split_at(cut);
        let mut split_then_mask = mask_features(a, &active).unwrap();
        split_then_mask.extend(mask_features(b, &active).unwrap());
        prop_assert_eq!(&masked, &split_then_mask);
        prop_assert!(masked.iter().all(|x| x.features.len() == k));
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), gaussian in any::<bool>()) {
        let generator = if gaussian {
            GeneratorKind::DriftingGaussian { separations: vec![1.0, 0.2, 0.0], shift: 0.5 }
        } else {
            GeneratorKind::ThresholdSum { n_distractors: 1 }
        };
        let spec = SyntheticSpec { generator, n_instances: 200, drift_points: vec![50, 120], noise: 0.05, seed };
        prop_assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }
}

#[test]
fn fixed_stump_is_perfect_on_noiseless_stream() {
    let s = generate(&SyntheticSpec {
        generator: GeneratorKind::ThresholdSum { n_distractors: 3 },
        n_instances: 5000,
        drift_points: vec![],
        noise: 0.0,
        seed: 1,
    })
    .unwrap();
    let hits = s
        .iter()
        .filter(|x| ((x.get("x0").unwrap() + x.get("x1").unwrap() > 8.0) as u8) == x.label)
        .count();
    assert_eq!(hits, s.len());
}

#[test]
fn noise_caps_forest_accuracy() {
    use dafi_core::forest::{ArfEnsemble, ArfParams};
    let s = generate(&SyntheticSpec {
        generator: GeneratorKind::ThresholdSum { n_distractors: 1 },
        n_instances: 6000,
        drift_points: vec![],
        noise: 0.1,
        seed: 2,
    })
    .unwrap();
    let bayes = s
        .iter()
        .filter(|x| ((x.get("x0").unwrap() + x.get("x1").unwrap() > 8.0) as u8) == x.label)
        .count() as f64
        / s.len() as f64;
    assert!((bayes - 0.9).abs() < 0.015, "{bayes}");
    let mut e = ArfEnsemble::new(ArfParams { n_trees: 5, ..ArfParams::default() }).unwrap();
    let mut hits = 0;
    for x in &s {
        hits += (e.predict_one(x).class == x.label) as usize;
        e.learn_one(x).unwrap();
    }
    let acc = hits as f64 / s.len() as f64;
    assert!(acc <= 0.9 + 0.02, "{acc}");
    assert!(acc > 0.7, "{acc}");
}
