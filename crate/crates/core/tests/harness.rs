use dafi_core::data::{generate, FeatureSchedule, GeneratorKind, SyntheticSpec};
use dafi_core::harness::{run_experiment, summarize, BatchPlan, ExperimentConfig, ExperimentReport, Method};
use dafi_core::{ArfParams, DafiConfig};

fn small_run(eta: f64, timing_seed_free: bool) -> ExperimentReport {
    let spec = SyntheticSpec {
        generator: GeneratorKind::ThresholdSum { n_distractors: 2 },
        n_instances: 3000,
        drift_points: vec![1500],
        noise: 0.05,
        seed: 4,
    };
    let stream = generate(&spec).unwrap();
    let universe = spec.feature_names();
    let plan = BatchPlan::new(6, FeatureSchedule::staged(&universe));
    let cfg = ExperimentConfig {
        arf: ArfParams { n_trees: 3, ..ArfParams::default() },
        dafi: DafiConfig { eta, n_samples: 8, background_size: 16, ..DafiConfig::default() },
        timing_seed_free,
        ..ExperimentConfig::default()
    };
    run_experiment(&stream, &universe, &plan, &cfg).unwrap()
}

fn row(r: &ExperimentReport, batch: usize, m: Method) -> &dafi_core::harness::MethodBatch {
    r.batches[batch].methods.iter().find(|x| x.method == m).unwrap()
}

#[test]
fn shap_agrees_with_itself_and_saves_nothing() {
    let r = small_run(0.3, false);
    for b in 0..r.batches.len() {
        let s = row(&r, b, Method::Shap);
        assert_eq!(s.saved_pct, Some(0.0));
        if s.n_scored > 0 {
            assert_eq!((s.topk_set, s.topk_exact, s.spearman), (Some(1.0), Some(1.0), Some(1.0)));
        }
    }
    let shap = r.summary.methods.iter().find(|m| m.method == Method::Shap).unwrap();
    assert_eq!(shap.saved_pct, Some(0.0));
}

#[test]
fn dafi_is_perfect_on_drift_batches() {
    let r = small_run(0.3, false);
    assert!(r.batches[0].drift_flag);
    for b in r.batches.iter().filter(|b| b.drift_flag) {
        let d = row(&r, b.index, Method::Dafi);
        if d.n_scored > 0 {
            assert_eq!((d.topk_set, d.topk_exact, d.spearman), (Some(1.0), Some(1.0), Some(1.0)));
        }
    }
}

#[test]
fn summary_recomputes_from_batches() {
    let r = small_run(0.3, false);
    let back = ExperimentReport::from_json(&r.to_json()).unwrap();
    assert_eq!(summarize(&back.batches, &back.config.methods), r.summary);
}

#[test]
fn plan_respects_schedule_and_split() {
    let r = small_run(1.0, true);
    assert_eq!(r.batches.len(), 6);
    assert_eq!(r.batches[0].active_features.len(), 3);
    assert_eq!(r.batches[5].active_features.len(), 3);
    for b in &r.batches {
        assert_eq!(b.n_train + b.n_test, b.end - b.start);
        assert_eq!(b.n_train, (b.end - b.start) * 4 / 5);
        assert!(b.methods.iter().all(|m| m.runtime_s == 0.0));
    }
}

#[test]
fn seed_free_reports_are_identical() {
    assert_eq!(small_run(0.5, true).to_json(), small_run(0.5, true).to_json());
}

#[test]
fn unknown_scheduled_feature_is_rejected_before_training() {
    let stream = generate(&SyntheticSpec {
        generator: GeneratorKind::ThresholdSum { n_distractors: 0 },
        n_instances: 100,
        drift_points: vec![],
        noise: 0.0,
        seed: 0,
    })
    .unwrap();
    let plan = BatchPlan::new(2, FeatureSchedule::all_at_start(&["x0".into(), "nope".into()]));
    let err = run_experiment(&stream, &["x0".into(), "x1".into()], &plan, &ExperimentConfig::default()).unwrap_err();
    assert!(err.to_string().contains("nope"));
}
