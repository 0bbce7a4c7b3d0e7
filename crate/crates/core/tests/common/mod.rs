#![allow(dead_code)]

use barylab::extended::rational::{from_f64, ExactRational};
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A small interpolation problem whose inputs are all dyadic rationals.
#[derive(Clone, Debug)]
pub struct Case {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub y: Vec<f64>,
    pub x: f64,
}

pub fn exact(v: &[f64]) -> Vec<ExactRational> {
    v.iter().map(|&x| from_f64(x)).collect()
}

/// `prod_{j != k} 1 / (x_k - x_j)` in rationals.
pub fn exact_lambda(nodes: &[ExactRational]) -> Vec<ExactRational> {
    (0..nodes.len())
        .map(|k| {
            let mut p = ExactRational::one();
            for (j, xj) in nodes.iter().enumerate() {
                if j != k {
                    p *= &nodes[k] - xj;
                }
            }
            p.recip()
        })
        .collect()
}

/// Sorted distinct multiples of `2^-9` in `[-1, 1]`.
pub fn random_nodes(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut picks = std::collections::BTreeSet::new();
    while picks.len() < n + 1 {
        picks.insert(rng.gen_range(-512i32..=512));
    }
    picks.into_iter().map(|i| i as f64 / 512.0).collect()
}

/// Rounded barycentric weights of `nodes`, each scaled by `1 + u/1024` with
/// `|u| <= 8`, so poles stay away from the interval.
pub fn near_lambda(rng: &mut ChaCha8Rng, nodes: &[f64]) -> Vec<f64> {
    exact_lambda(&exact(nodes))
        .iter()
        .map(|l| {
            let w = barylab::extended::rational::to_f64(l);
            w * (1.0 + rng.gen_range(-8i32..=8) as f64 / 1024.0)
        })
        .collect()
}

pub fn random_case(rng: &mut ChaCha8Rng, max_n: usize) -> Case {
    let n = rng.gen_range(1..=max_n);
    let nodes = random_nodes(rng, n);
    let weights = near_lambda(rng, &nodes);
    let y = (0..=n).map(|_| rng.gen_range(-256i32..=256) as f64 / 16.0).collect();
    let x = rng.gen_range(-(1i64 << 20)..=(1i64 << 20)) as f64 / (1u64 << 20) as f64;
    Case { nodes, weights, y, x }
}

pub fn abs(x: &ExactRational) -> ExactRational {
    if *x < ExactRational::zero() {
        -x.clone()
    } else {
        x.clone()
    }
}
