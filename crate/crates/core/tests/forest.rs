mod common;

use std::collections::HashSet;

use common::{names, stream, trained};
use dafi_core::explain::mdi_importance;
use dafi_core::forest::{ArfEnsemble, ArfParams, EnsembleSnapshot, NodeStats};

fn predictions(e: &mut ArfEnsemble, data: &[dafi_core::Instance]) -> Vec<[f64; 2]> {
    data.iter()
        .map(|x| {
            let p = e.predict_one(x).distribution;
            e.learn_one(x).unwrap();
            p
        })
        .collect()
}

#[test]
fn identical_seed_and_stream_reproduce() {
    let data = stream(4, 3000, 5);
    let mk = || ArfEnsemble::new(ArfParams { seed: 9, ..ArfParams::default() }).unwrap();
    let (mut a, mut b) = (mk(), mk());
    assert_eq!(predictions(&mut a, &data), predictions(&mut b, &data));
    assert_eq!(
        EnsembleSnapshot::capture(&a).to_json(),
        EnsembleSnapshot::capture(&b).to_json()
    );
    assert_eq!(a.n_trees(), 10);
}

#[test]
fn constant_feature_changes_nothing() {
    let data = stream(3, 3000, 8);
    let padded: Vec<_> = data
        .iter()
        .map(|x| {
            let mut y = x.clone();
            y.features.insert("aaa_constant".into(), 4.2);
            y
        })
        .collect();
    let mk = || ArfEnsemble::new(ArfParams { n_trees: 5, ..ArfParams::default() }).unwrap();
    let (mut a, mut b) = (mk(), mk());
    let pa = predictions(&mut a, &data);
    let pb = predictions(&mut b, &padded);
    assert_eq!(pa, pb);
    let col = b.registry().index_of("aaa_constant").unwrap();
    assert!(b.trees().flat_map(|t| t.nodes()).filter_map(|n| n.split()).all(|s| s.feature != col));
}

#[test]
fn split_stats_partition_parent_totals() {
    let (e, _) = trained(4, 4000, 5, 3);
    let mut splits = 0;
    for t in e.trees() {
        for n in t.nodes() {
            if let Some(s) = n.split() {
                splits += 1;
                let sum = s.branch_stats[0].total() + s.branch_stats[1].total();
                assert!((sum - n.stats.total()).abs() < 1e-9 * n.stats.total().max(1.0));
            }
        }
    }
    assert!(splits > 0);
}

#[test]
fn snapshot_round_trips() {
    let (e, data) = trained(4, 2000, 4, 21);
    let json = EnsembleSnapshot::capture(&e).to_json();
    let back = EnsembleSnapshot::from_json(&json).unwrap().restore().unwrap();
    assert_eq!(EnsembleSnapshot::capture(&back).to_json(), json);
    for x in &data[..200] {
        assert_eq!(e.predict_one(x), back.predict_one(x));
    }
}

#[test]
fn mdi_depends_only_on_visited_nodes() {
    let (e, data) = trained(4, 4000, 5, 13);
    let f = names(4);
    let mut checked = 0;
    for x in &data[..50] {
        let before = mdi_importance(x, &e, &f);
        let mut snap = EnsembleSnapshot::capture(&e);
        for (m, tree) in snap.trees.iter_mut().enumerate() {
            let visited: HashSet<usize> = e.route(m, x).nodes.into_iter().collect();
            for node in tree.nodes.iter_mut().filter(|n| !visited.contains(&n.id)) {
                node.stats = NodeStats::new([node.stats.class_freq[1] + 3.0, node.stats.class_freq[0] + 1.0]);
                if let Some(s) = node.split.as_mut() {
                    s.branch_stats = [NodeStats::new([1.0, 5.0]), NodeStats::new([7.0, 0.5])];
                    s.feature = f[(f.iter().position(|n| *n == s.feature).unwrap() + 1) % 4].clone();
                    checked += 1;
                }
            }
        }
        let edited = snap.restore().unwrap();
        assert_eq!(mdi_importance(x, &edited, &f), before);
    }
    assert!(checked > 0, "no off-path split was edited");
}

