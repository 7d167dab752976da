#![allow(dead_code)]

use dafi_core::explain::CoalitionGame;
use dafi_core::forest::{ArfEnsemble, ArfParams, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}

/// Random stream whose label depends on the first two features.
pub fn stream(d: usize, n: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..d).map(|j| if j < 2 { 1.0 } else { rng.random_range(-0.3..0.3) }).collect();
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
            let s: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
            let noise = rng.random_range(-0.1..0.1);
            Instance::from_pairs(names(d).iter().map(String::as_str).zip(v), (s + noise > 1.0) as u8)
        })
        .collect()
}

pub fn trained(d: usize, n: usize, trees: usize, seed: u64) -> (ArfEnsemble, Vec<Instance>) {
    let data = stream(d, n, seed);
    let mut e = ArfEnsemble::new(ArfParams {
        n_trees: trees,
        seed,
        ..ArfParams::default()
    })
    .unwrap();
    for x in &data {
        e.learn_one(x).unwrap();
    }
    (e, data)
}

/// Average marginal contribution over every ordering of the players.
pub fn permutation_oracle<G: CoalitionGame>(game: &G) -> Vec<f64> {
    let d = game.n_players();
    let mut perm: Vec<usize> = (0..d).collect();
    let mut phi = vec![0.0; d];
    let mut count = 0usize;
    loop {
        let mut mask = 0u32;
        let mut prev = game.value(0);
        for &j in &perm {
            mask |= 1 << j;
            let v = game.value(mask);
            phi[j] += v - prev;
            prev = v;
        }
        count += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    phi.iter().map(|p| p / count as f64).collect()
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
