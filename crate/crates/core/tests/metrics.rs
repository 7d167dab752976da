use dafi_core::explain::{ExplainMethod, ImportanceVector};
use dafi_core::harness::{
    dynamic_top_k, saved_runtime_pct, spearman_from_ranks, spearman_norm, topk_exact_match,
    topk_set_match,
};
use proptest::prelude::*;

fn v(names: &[&str], raw: &[f64]) -> ImportanceVector {
    ImportanceVector::from_raw(
        names.iter().map(|s| s.to_string()).collect(),
        raw.to_vec(),
        ExplainMethod::Shap,
    )
}

#[test]
fn top_k_examples() {
    let t = dynamic_top_k(&v(&["a", "b", "c", "d"], &[0.5, 0.3, 0.15, 0.05]), 0.8).unwrap();
    assert_eq!(t.k, 2);
    assert_eq!(t.features, vec!["a", "b"]);
    assert_eq!(dynamic_top_k(&v(&["a"], &[1.0]), 0.8).unwrap().k, 1);
    assert_eq!(dynamic_top_k(&v(&["a", "b", "c", "d"], &[1.0; 4]), 0.8).unwrap().k, 4);
}

#[test]
fn match_examples() {
    let shap = dynamic_top_k(&v(&["a", "b", "c"], &[0.5, 0.4, 0.1]), 0.8).unwrap();
    let swapped = v(&["a", "b", "c"], &[0.4, 0.5, 0.1]);
    assert_eq!((topk_set_match(&shap, &swapped), topk_exact_match(&shap, &swapped)), (1.0, 0.0));
    let same = v(&["a", "b", "c"], &[0.5, 0.4, 0.1]);
    assert_eq!((topk_set_match(&shap, &same), topk_exact_match(&shap, &same)), (1.0, 1.0));
    let other = v(&["a", "b", "c"], &[0.5, 0.1, 0.4]);
    assert_eq!((topk_set_match(&shap, &other), topk_exact_match(&shap, &other)), (0.0, 0.0));
}

#[test]
fn spearman_examples() {
    assert_eq!(spearman_from_ranks(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
    assert_eq!(spearman_from_ranks(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]).unwrap(), 0.0);
    assert_eq!(spearman_from_ranks(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap(), 0.75);
    assert!(spearman_from_ranks(&[1.0], &[1.0]).is_err());
}

#[test]
fn saved_runtime_examples() {
    assert_eq!(saved_runtime_pct(45.0, 100.0).unwrap().pct, 55.0);
    assert_eq!(saved_runtime_pct(3.7, 3.7).unwrap().pct, 0.0);
    let slow = saved_runtime_pct(150.0, 100.0).unwrap();
    assert_eq!(slow.pct, 0.0);
    assert_eq!(slow.raw, -50.0);
    assert!(saved_runtime_pct(1.0, 0.0).is_none());
}

fn scores() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u32..6).prop_map(|v| v as f64), 2..8)
}

proptest! {
    #[test]
    fn spearman_ignores_positive_rescaling(a in scores(), c in 0.01f64..100.0, seed in any::<u64>()) {
        let names: Vec<String> = (0..a.len()).map(|i| format!("f{i}")).collect();
        let b: Vec<f64> = a.iter().map(|x| (x * 7.0 + seed as f64) % 5.0).collect();
        let va = ImportanceVector::from_raw(names.clone(), a.clone(), ExplainMethod::Shap);
        let vb = ImportanceVector::from_raw(names.clone(), b.clone(), ExplainMethod::Mdi);
        let vc = ImportanceVector::from_raw(names, a.iter().map(|x| x * c).collect(), ExplainMethod::Shap);
        prop_assert_eq!(spearman_norm(&va, &vb).unwrap(), spearman_norm(&vc, &vb).unwrap());
    }

    #[test]
    fn top_k_is_monotone_in_theta(a in scores(), t1 in 0.01f64..1.0, t2 in 0.01f64..1.0) {
        prop_assume!(a.iter().any(|x| *x > 0.0));
        let names: Vec<String> = (0..a.len()).map(|i| format!("f{i}")).collect();
        let va = ImportanceVector::from_raw(names, a, ExplainMethod::Shap);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let (k1, k2) = (dynamic_top_k(&va, lo).unwrap().k, dynamic_top_k(&va, hi).unwrap().k);
        prop_assert!(k1 <= k2);
        prop_assert!(k1 >= 1 && k2 <= va.len());
    }

    #[test]
    fn exact_implies_set(a in scores(), b in scores()) {
        prop_assume!(a.iter().any(|x| *x > 0.0));
        let n = a.len().min(b.len());
        let names: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
        let va = ImportanceVector::from_raw(names.clone(), a[..n].to_vec(), ExplainMethod::Shap);
        prop_assume!(!va.degenerate);
        let vb = ImportanceVector::from_raw(names, b[..n].to_vec(), ExplainMethod::Mdi);
        let top = dynamic_top_k(&va, 0.8).unwrap();
        if topk_exact_match(&top, &vb) == 1.0 {
            prop_assert_eq!(topk_set_match(&top, &vb), 1.0);
        }
    }
}
