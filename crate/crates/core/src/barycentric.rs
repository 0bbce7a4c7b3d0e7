//! The second barycentric formula in working precision.
//!
//! Sums run left to right over `k = 0..=n` with one rounding per operation
//! and no fused multiply-add, so the computed value follows the standard
//! rounding-error model for this formula.

use crate::error::{Error, Result};
use crate::nodes::WeightSet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    /// Index of the node equal to `x`, if any.
    pub node_hit: Option<usize>,
    /// Computed denominator; zero on a node hit.
    pub denom: f64,
}

fn check_lengths(nodes: &[f64], weights: &[f64]) -> Result<()> {
    if weights.len() != nodes.len() {
        return Err(Error::LengthMismatch { expected: nodes.len(), actual: weights.len() });
    }
    if nodes.is_empty() {
        return Err(Error::DegenerateFamily);
    }
    Ok(())
}

/// `sum_k w_k / (x - x_k)`, or `None` when `x` is a node.
#[inline]
pub fn denominator(nodes: &[f64], weights: &[f64], x: f64) -> Option<f64> {
    let mut den = 0.0;
    for (&xk, &wk) in nodes.iter().zip(weights) {
        if x == xk {
            return None;
        }
        den += wk / (x - xk);
    }
    Some(den)
}

pub fn eval_second_form(nodes: &[f64], weights: &WeightSet, y: &[f64], x: f64) -> Result<EvalResult> {
    let w = weights.working();
    check_lengths(nodes, w)?;
    if y.len() != nodes.len() {
        return Err(Error::LengthMismatch { expected: nodes.len(), actual: y.len() });
    }
    if let Some(k) = nodes.iter().position(|&xk| xk == x) {
        return Ok(EvalResult { value: y[k], node_hit: Some(k), denom: 0.0 });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..nodes.len() {
        let t = w[k] / (x - nodes[k]);
        num += t * y[k];
        den += t;
    }
    if den == 0.0 {
        return Err(Error::Pole { left: x, right: x });
    }
    Ok(EvalResult { value: num / den, node_hit: None, denom: den })
}

/// The `k`-th Lagrange basis polynomial in barycentric form.
///
/// Bit-identical to [`eval_second_form`] with `y = e_k`: every other numerator
/// term is an exact zero.
pub fn eval_lagrange_basis(nodes: &[f64], weights: &WeightSet, k: usize, x: f64) -> Result<EvalResult> {
    let w = weights.working();
    check_lengths(nodes, w)?;
    if k >= nodes.len() {
        return Err(Error::IndexOutOfRange { index: k, n: nodes.len() - 1 });
    }
    if let Some(j) = nodes.iter().position(|&xj| xj == x) {
        let value = if j == k { 1.0 } else { 0.0 };
        return Ok(EvalResult { value, node_hit: Some(j), denom: 0.0 });
    }
    let den = denominator(nodes, w, x).expect("x is not a node");
    if den == 0.0 {
        return Err(Error::Pole { left: x, right: x });
    }
    let t = w[k] / (x - nodes[k]);
    Ok(EvalResult { value: t / den, node_hit: None, denom: den })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScanVerdict {
    /// No sign change of the denominator was found between adjacent nodes.
    PoleFree,
    /// The denominator changes sign (or vanishes) in `[left, right]`.
    SignChange { left: f64, right: f64 },
}

/// Looks for zeros of the denominator in `[lo, hi]`.
///
/// The interval is split at the nodes it contains; each piece gets
/// `max(2, grid_size / pieces)` Chebyshev-distributed samples, which cluster
/// next to the nodes. A sign change inside a piece is reported with the
/// bracketing samples. Crossing a node is not a sign change: the denominator
/// has a pole there.
pub fn denominator_scan(
    nodes: &[f64],
    weights: &WeightSet,
    lo: f64,
    hi: f64,
    grid_size: usize,
) -> Result<ScanVerdict> {
    let w = weights.working();
    check_lengths(nodes, w)?;
    if grid_size < 2 {
        return Err(Error::InvalidParameter(format!("grid size {grid_size} < 2")));
    }
    if !(lo <= hi) {
        return Err(Error::EmptyInterval { lo, hi });
    }
    if lo == hi {
        return Ok(match denominator(nodes, w, lo) {
            Some(0.0) => ScanVerdict::SignChange { left: lo, right: hi },
            _ => ScanVerdict::PoleFree,
        });
    }
    let mut cuts = vec![lo];
    cuts.extend(nodes.iter().copied().filter(|&x| x > lo && x < hi));
    cuts.push(hi);
    let pieces = cuts.len() - 1;
    let m = (grid_size / pieces).max(2);
    for p in 0..pieces {
        let (a, b) = (cuts[p], cuts[p + 1]);
        let mut samples = Vec::with_capacity(m + 2);
        samples.push(a);
        for i in 1..=m {
            let t = (1.0 - (i as f64 * std::f64::consts::PI / (m + 1) as f64).cos()) / 2.0;
            samples.push(a + (b - a) * t);
        }
        samples.push(b);
        let mut prev: Option<(f64, f64)> = None;
        for &x in &samples {
            let Some(d) = denominator(nodes, w, x) else {
                continue;
            };
            if d == 0.0 {
                return Ok(ScanVerdict::SignChange { left: x, right: x });
            }
            if let Some((px, pd)) = prev {
                if (pd < 0.0) != (d < 0.0) {
                    return Ok(ScanVerdict::SignChange { left: px, right: x });
                }
            }
            prev = Some((x, d));
        }
    }
    Ok(ScanVerdict::PoleFree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes::{chebyshev_nodes, salzer_weights};

    fn ws(v: &[f64]) -> WeightSet {
        WeightSet::custom(v.to_vec()).unwrap()
    }

    #[test]
    fn node_hit_returns_data() {
        let r = eval_second_form(&[0.0, 0.5, 2.0], &ws(&[1.0, -3.0, 2.0]), &[4.0, -1.5, 9.0], 0.5).unwrap();
        assert_eq!(r.value, -1.5);
        assert_eq!(r.node_hit, Some(1));
    }

    #[test]
    fn linear_interpolant() {
        let r = eval_second_form(&[0.0, 1.0], &ws(&[-1.0, 1.0]), &[0.0, 1.0], 0.5).unwrap();
        assert_eq!(r.value, 0.5);
        assert_eq!(r.node_hit, None);
    }

    #[test]
    fn basis_example_and_identity() {
        let nodes = [-1.0, 0.0, 1.0];
        let w = ws(&[0.5, -1.0, 0.5]);
        let v = eval_lagrange_basis(&nodes, &w, 1, 0.5).unwrap().value;
        assert!((v - 0.75).abs() <= 4.0 * f64::EPSILON);
        assert_eq!(eval_lagrange_basis(&nodes, &w, 1, 1.0).unwrap().value, 0.0);
        assert_eq!(eval_lagrange_basis(&nodes, &w, 1, 0.0).unwrap().value, 1.0);
        for x in [-0.9, -0.3, 0.123, 0.77] {
            for k in 0..3 {
                let mut y = [0.0; 3];
                y[k] = 1.0;
                let a = eval_second_form(&nodes, &w, &y, x).unwrap().value;
                let b = eval_lagrange_basis(&nodes, &w, k, x).unwrap().value;
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn pole_is_reported() {
        let r = eval_second_form(&[0.0, 1.0], &ws(&[1.0, 1.0]), &[0.0, 1.0], 0.5);
        assert!(matches!(r, Err(Error::Pole { .. })));
    }

    #[test]
    fn scan_verdicts() {
        let f = chebyshev_nodes(10).unwrap();
        let w = salzer_weights(10).unwrap();
        assert_eq!(denominator_scan(f.nodes_wk(), &w, -1.0, 1.0, 10_000).unwrap(), ScanVerdict::PoleFree);
        match denominator_scan(&[0.0, 1.0], &ws(&[1.0, 1.0]), 0.0, 1.0, 100).unwrap() {
            ScanVerdict::SignChange { left, right } => assert!(left <= 0.5 && 0.5 <= right),
            v => panic!("{v:?}"),
        }
        assert_eq!(denominator_scan(&[0.0, 1.0], &ws(&[1.0, 1.0]), 0.25, 0.25, 2).unwrap(), ScanVerdict::PoleFree);
        assert!(matches!(
            denominator_scan(&[0.0, 1.0], &ws(&[1.0, 1.0]), 0.5, 0.5, 2).unwrap(),
            ScanVerdict::SignChange { .. }
        ));
    }
}
