use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nodes::WeightSet;

/// Relative offsets `2^-p` of the extra samples placed next to each node.
const BOOSTS: [i32; 5] = [4, 8, 16, 26, 40];

/// Lebesgue function `sum_k |w_k/(x-x_k)| / |sum_k w_k/(x-x_k)|` at a
/// non-node `x`; returns the signed denominator as well.
#[inline]
pub fn lebesgue_function(nodes: &[f64], weights: &[f64], x: f64) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&xk, &wk) in nodes.iter().zip(weights) {
        let t = wk / (x - xk);
        num += t.abs();
        den += t;
    }
    (num / den.abs(), den)
}

fn gap_max(nodes: &[f64], w: &[f64], a: f64, b: f64, a_node: bool, b_node: bool, m: usize) -> Result<f64> {
    let mut xs = Vec::with_capacity(m + 2 * BOOSTS.len() + 1);
    if !a_node {
        xs.push(a);
    }
    for &p in BOOSTS.iter() {
        let off = (b - a) * f64::powi(2.0, -p);
        xs.push(a + off);
    }
    for i in 1..m {
        let t = (1.0 - (i as f64 * std::f64::consts::PI / m as f64).cos()) / 2.0;
        xs.push(a + (b - a) * t);
    }
    for &p in BOOSTS.iter().rev() {
        let off = (b - a) * f64::powi(2.0, -p);
        xs.push(b - off);
    }
    if !b_node {
        xs.push(b);
    }
    let mut best: f64 = 0.0;
    let mut sign: Option<bool> = None;
    for x in xs {
        if (a_node && x <= a) || (b_node && x >= b) {
            continue;
        }
        let (l, den) = lebesgue_function(nodes, w, x);
        if den == 0.0 || !l.is_finite() {
            return Err(Error::Pole { left: x, right: x });
        }
        let s = den < 0.0;
        if sign.is_some_and(|prev| prev != s) {
            return Err(Error::Pole { left: a, right: b });
        }
        sign = Some(s);
        best = best.max(l);
    }
    Ok(best)
}

/// Lower estimate of the Lebesgue constant on `[lo, hi]`.
///
/// Each gap between consecutive cut points (the interval ends and the nodes
/// inside) is sampled at the `m - 1` interior Chebyshev-Lobatto points of
/// the gap plus fixed points close to its ends. Doubling `m` keeps every old
/// sample, so the estimate never decreases under refinement.
pub fn lebesgue_constant(nodes: &[f64], weights: &WeightSet, lo: f64, hi: f64, samples_per_gap: usize) -> Result<f64> {
    let w = weights.working();
    if w.len() != nodes.len() {
        return Err(Error::LengthMismatch { expected: nodes.len(), actual: w.len() });
    }
    if samples_per_gap < 2 {
        return Err(Error::InvalidParameter(format!("samples per gap {samples_per_gap} < 2")));
    }
    if !(lo < hi) {
        return Err(Error::EmptyInterval { lo, hi });
    }
    let mut cuts: Vec<(f64, bool)> = vec![(lo, nodes.contains(&lo))];
    cuts.extend(nodes.iter().filter(|&&x| x > lo && x < hi).map(|&x| (x, true)));
    cuts.push((hi, nodes.contains(&hi)));
    let has_node = cuts.iter().any(|c| c.1);
    let per_gap: Vec<Result<f64>> = cuts
        .par_windows(2)
        .map(|c| gap_max(nodes, w, c[0].0, c[1].0, c[0].1, c[1].1, samples_per_gap))
        .collect();
    let mut best: f64 = if has_node { 1.0 } else { 0.0 };
    for r in per_gap {
        best = best.max(r?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes::{chebyshev_nodes, lambda_weights, salzer_weights, NodeFamily, Precision};

    #[test]
    fn linear_interpolation_is_one() {
        let f = NodeFamily::custom(vec![0.3, 1.7], 0.3, 1.7).unwrap();
        let w = lambda_weights(&f, Precision::Working, 1.0).unwrap();
        let l = lebesgue_constant(f.nodes_wk(), &w, 0.3, 1.7, 64).unwrap();
        assert!((l - 1.0).abs() < 1e-14, "{l}");
    }

    #[test]
    fn chebyshev_hundred_within_cited_bound() {
        let f = chebyshev_nodes(100).unwrap();
        let w = salzer_weights(100).unwrap();
        let l = lebesgue_constant(f.nodes_wk(), &w, -1.0, 1.0, 1000).unwrap();
        assert!(l >= 1.0 && l <= 0.67667 * 100f64.ln() + 1.0236, "{l}");
        // the known value is about 3.887
        assert!(l > 3.8, "{l}");
    }

    #[test]
    fn pole_rejected_and_grid_checked() {
        let w = WeightSet::custom(vec![1.0, 1.0]).unwrap();
        assert!(matches!(lebesgue_constant(&[0.0, 1.0], &w, 0.0, 1.0, 16), Err(Error::Pole { .. })));
        let w = WeightSet::custom(vec![-1.0, 1.0]).unwrap();
        assert!(lebesgue_constant(&[0.0, 1.0], &w, 0.0, 1.0, 1).is_err());
    }
}
