//! Node families and barycentric weight families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::extended::hiprec::{exponent, ldexp, HiPrec};
use crate::extended::trig::chebyshev_point;

/// Sorted interpolation nodes together with the interval `[lo, hi]`.
///
/// Nodes are held in extended precision; `nodes_wk` is their rounding to
/// `f64`. Nodes may lie outside the interval, but some node must exceed `lo`
/// and some node must be below `hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeFamily {
    n: usize,
    nodes_hi: Vec<HiPrec>,
    nodes_wk: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl NodeFamily {
    /// Builds a family from extended-precision nodes.
    pub fn from_extended(nodes: Vec<HiPrec>, lo: f64, hi: f64) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::DegenerateFamily);
        }
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::EmptyInterval { lo, hi });
        }
        for k in 0..nodes.len() {
            if !nodes[k].is_finite() {
                return Err(Error::InvalidParameter(format!("node {k} is not finite")));
            }
            if k > 0 && nodes[k - 1] >= nodes[k] {
                return Err(Error::NotIncreasing { index: k });
            }
        }
        let nodes_wk: Vec<f64> = nodes.iter().map(|x| x.to_f64()).collect();
        for k in 1..nodes_wk.len() {
            if nodes_wk[k - 1] >= nodes_wk[k] {
                return Err(Error::RepeatedNode { left: k - 1, right: k });
            }
        }
        let family = Self { n: nodes.len() - 1, nodes_hi: nodes, nodes_wk, lo, hi };
        if family.k_minus().is_none() || family.k_plus().is_none() {
            return Err(Error::InvalidParameter("all nodes lie on one side of the interval".into()));
        }
        Ok(family)
    }

    /// Builds a family whose nodes are exactly the given doubles.
    pub fn custom(nodes: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        Self::from_extended(nodes.into_iter().map(HiPrec::from).collect(), lo, hi)
    }

    /// The family whose exact nodes are this family's rounded nodes.
    pub fn rounded(&self) -> Self {
        Self {
            n: self.n,
            nodes_hi: self.nodes_wk.iter().copied().map(HiPrec::from).collect(),
            nodes_wk: self.nodes_wk.clone(),
            lo: self.lo,
            hi: self.hi,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes_hi(&self) -> &[HiPrec] {
        &self.nodes_hi
    }

    pub fn nodes_wk(&self) -> &[f64] {
        &self.nodes_wk
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Smallest `k` with `x_k > lo`.
    pub fn k_minus(&self) -> Option<usize> {
        let lo = HiPrec::from(self.lo);
        self.nodes_hi.iter().position(|&x| x > lo)
    }

    /// Largest `k` with `x_k < hi`.
    pub fn k_plus(&self) -> Option<usize> {
        let hi = HiPrec::from(self.hi);
        self.nodes_hi.iter().rposition(|&x| x < hi)
    }

    /// `max_k |nodes_wk[k] - nodes_hi[k]|`.
    pub fn rounding_error(&self) -> f64 {
        self.nodes_hi
            .iter()
            .zip(&self.nodes_wk)
            .map(|(&h, &w)| (HiPrec::from(w) - h).abs().to_f64())
            .fold(0.0, f64::max)
    }
}

/// Chebyshev points of the second kind, `x_k = -cos(k pi / n)`, on `[-1, 1]`.
pub fn chebyshev_nodes(n: usize) -> Result<NodeFamily> {
    if n == 0 {
        return Err(Error::DegenerateFamily);
    }
    let nodes = (0..=n).map(|k| chebyshev_point(k, n)).collect();
    NodeFamily::from_extended(nodes, -1.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Salzer,
    Numerical,
    ReferenceLambda,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    Working,
    Extended,
}

/// Nonzero barycentric weights with their origin.
///
/// `diff_scale` is the factor `c` applied to every node difference when the
/// weights were formed as products, so `w_k = c^-n * lambda_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    values: Vec<HiPrec>,
    rounded: Vec<f64>,
    provenance: Provenance,
    precision: Precision,
    diff_scale: f64,
}

impl WeightSet {
    fn build(
        values: Vec<HiPrec>,
        provenance: Provenance,
        precision: Precision,
        diff_scale: f64,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DegenerateFamily);
        }
        if !(diff_scale.is_finite() && diff_scale > 0.0) {
            return Err(Error::InvalidParameter(format!("diff_scale {diff_scale}")));
        }
        let rounded: Vec<f64> = values.iter().map(|w| w.to_f64()).collect();
        for (k, (&w, &r)) in values.iter().zip(&rounded).enumerate() {
            if w.is_zero() || r == 0.0 {
                return Err(Error::ZeroWeight { index: k });
            }
            if !w.is_finite() {
                return Err(Error::OutOfRange(format!("weight {k} is not finite")));
            }
        }
        Ok(Self { values, rounded, provenance, precision, diff_scale })
    }

    /// User-supplied working-precision weights.
    pub fn custom(weights: Vec<f64>) -> Result<Self> {
        Self::build(
            weights.into_iter().map(HiPrec::from).collect(),
            Provenance::Custom,
            Precision::Working,
            1.0,
        )
    }

    /// User-supplied extended-precision weights.
    pub fn custom_extended(weights: Vec<HiPrec>) -> Result<Self> {
        Self::build(weights, Provenance::Custom, Precision::Extended, 1.0)
    }

    /// The same weights multiplied by `factor`, keeping provenance.
    pub fn scaled(&self, factor: HiPrec) -> Result<Self> {
        let values = self.values.iter().map(|&w| w * factor).collect();
        Self::build(values, self.provenance, self.precision, self.diff_scale)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Degree `n` (one less than the number of weights).
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    /// Weights rounded to working precision; exact for working-precision sets.
    pub fn working(&self) -> &[f64] {
        &self.rounded
    }

    pub fn extended(&self) -> &[HiPrec] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn diff_scale(&self) -> f64 {
        self.diff_scale
    }
}

// Partial products are kept in [2^-RANGE, 2^RANGE] by pulling out powers of two.
const RANGE: i32 = 500;

fn lambda_working(nodes: &[f64], k: usize, c: f64) -> Result<f64> {
    let xk = nodes[k];
    let mut p = 1.0_f64;
    let mut e = 0_i32;
    for (j, &xj) in nodes.iter().enumerate() {
        if j == k {
            continue;
        }
        let d = xk - xj;
        if d == 0.0 {
            return Err(Error::RepeatedNode { left: j.min(k), right: j.max(k) });
        }
        p *= c * d;
        let pe = exponent(p);
        if pe.abs() > RANGE {
            p = ldexp(p, -pe);
            e += pe;
        }
    }
    let w = ldexp(1.0 / p, -e);
    if w == 0.0 || !w.is_finite() {
        return Err(Error::OutOfRange(format!("weight {k} leaves the double range")));
    }
    Ok(w)
}

fn lambda_extended(nodes: &[HiPrec], k: usize, c: f64) -> Result<HiPrec> {
    let xk = nodes[k];
    let mut p = HiPrec::ONE;
    let mut e = 0_i32;
    for (j, &xj) in nodes.iter().enumerate() {
        if j == k {
            continue;
        }
        let d = xk - xj;
        if d.is_zero() {
            return Err(Error::RepeatedNode { left: j.min(k), right: j.max(k) });
        }
        p *= d.mul_f64(c);
        let pe = exponent(p.hi());
        if pe.abs() > RANGE {
            p = p.mul_pow2(-pe);
            e += pe;
        }
    }
    let w = p.recip();
    // Keep the low word representable before the final power-of-two shift.
    let we = exponent(w.hi()) - e;
    if !(-1021 + 106..=1023).contains(&we) {
        return Err(Error::OutOfRange(format!("weight {k} leaves the double range")));
    }
    Ok(w.mul_pow2(-e))
}

/// Weights `w_k = prod_{j != k} 1 / (c (x_k - x_j))`.
///
/// Working precision forms the product from the rounded nodes in `f64`, one
/// rounding per subtraction, multiplication and the final division.
/// Extended precision uses the extended nodes throughout. Powers of two are
/// factored out of partial products, so no intermediate overflow or
/// underflow occurs.
pub fn lambda_weights(family: &NodeFamily, precision: Precision, diff_scale: f64) -> Result<WeightSet> {
    if !(diff_scale.is_finite() && diff_scale > 0.0) {
        return Err(Error::InvalidParameter(format!("diff_scale {diff_scale}")));
    }
    match precision {
        Precision::Working => {
            let nodes = family.nodes_wk();
            let values = (0..nodes.len())
                .map(|k| lambda_working(nodes, k, diff_scale).map(HiPrec::from))
                .collect::<Result<Vec<_>>>()?;
            WeightSet::build(values, Provenance::Numerical, precision, diff_scale)
        }
        Precision::Extended => {
            let nodes = family.nodes_hi();
            let values = (0..nodes.len())
                .map(|k| lambda_extended(nodes, k, diff_scale))
                .collect::<Result<Vec<_>>>()?;
            WeightSet::build(values, Provenance::ReferenceLambda, precision, diff_scale)
        }
    }
}

/// Closed-form weights `(-1)^k d_k` for Chebyshev points of the second kind,
/// with `d_0 = d_n = 1/2` and `d_k = 1` otherwise.
pub fn salzer_weights(n: usize) -> Result<WeightSet> {
    if n == 0 {
        return Err(Error::DegenerateFamily);
    }
    let values = (0..=n)
        .map(|k| {
            let d = if k == 0 || k == n { 0.5 } else { 1.0 };
            HiPrec::from(if k % 2 == 0 { d } else { -d })
        })
        .collect();
    WeightSet::build(values, Provenance::Salzer, Precision::Working, 1.0)
}

/// Displaces every node by a reproducible relative amount in
/// `[-magnitude, magnitude]`, rounding the result to a double.
///
/// An endpoint that coincides with a node follows that node; other endpoints
/// stay fixed. The perturbed family's nodes are exact doubles.
pub fn perturb_nodes(family: &NodeFamily, magnitude: f64, seed: u64) -> Result<NodeFamily> {
    if !(magnitude.is_finite() && magnitude >= 0.0) {
        return Err(Error::InvalidParameter(format!("magnitude {magnitude}")));
    }
    if magnitude == 0.0 {
        return Ok(family.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<f64> = family
        .nodes_hi()
        .iter()
        .map(|&x| {
            let u: f64 = rng.gen_range(-1.0..=1.0);
            (x + x.mul_f64(magnitude * u)).to_f64()
        })
        .collect();
    for k in 1..nodes.len() {
        if nodes[k - 1] >= nodes[k] {
            return Err(Error::NotIncreasing { index: k });
        }
    }
    let (lo, hi) = (HiPrec::from(family.lo()), HiPrec::from(family.hi()));
    let new_lo = family.nodes_hi().iter().position(|&x| x == lo).map_or(family.lo(), |k| nodes[k]);
    let new_hi = family.nodes_hi().iter().position(|&x| x == hi).map_or(family.hi(), |k| nodes[k]);
    let perturbed = NodeFamily::custom(nodes, new_lo, new_hi)?;
    for k in 0..=family.n() {
        let inside = |f: &NodeFamily| {
            let x = f.nodes_hi()[k];
            x > HiPrec::from(f.lo()) && x < HiPrec::from(f.hi())
        };
        if inside(family) != inside(&perturbed) {
            return Err(Error::EndpointCondition { index: k, reason: "node crossed an endpoint" });
        }
    }
    Ok(perturbed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_small() {
        let f = chebyshev_nodes(2).unwrap();
        assert_eq!(f.nodes_wk(), &[-1.0, 0.0, 1.0]);
        assert_eq!((f.lo(), f.hi()), (-1.0, 1.0));
        let f = chebyshev_nodes(4).unwrap();
        assert_eq!(f.nodes_hi()[1].to_decimal(20), "-7.0710678118654752440e-1");
        assert!(chebyshev_nodes(0).is_err());
    }

    #[test]
    fn chebyshev_symmetry_and_rounding() {
        for n in [1, 3, 10, 37, 100, 1001] {
            let f = chebyshev_nodes(n).unwrap();
            for k in 0..=n {
                assert_eq!(f.nodes_hi()[k], -f.nodes_hi()[n - k]);
            }
            assert!(f.rounding_error() <= 2.0 * f64::EPSILON);
        }
    }

    #[test]
    fn lambda_examples() {
        let f = NodeFamily::custom(vec![-1.0, 0.0, 1.0], -1.0, 1.0).unwrap();
        let w = lambda_weights(&f, Precision::Working, 1.0).unwrap();
        assert_eq!(w.working(), &[0.5, -1.0, 0.5]);
        assert_eq!(w.provenance(), Provenance::Numerical);
        let w = lambda_weights(&f, Precision::Extended, 2.0).unwrap();
        assert_eq!(w.working(), &[0.125, -0.25, 0.125]);
        assert_eq!(w.provenance(), Provenance::ReferenceLambda);
        let f = NodeFamily::custom(vec![0.25, 3.0], 0.0, 4.0).unwrap();
        let w = lambda_weights(&f, Precision::Working, 1.0).unwrap();
        assert_eq!(w.working(), &[1.0 / (0.25 - 3.0), 1.0 / (3.0 - 0.25)]);
    }

    #[test]
    fn lambda_large_n_stays_in_range() {
        let f = chebyshev_nodes(20_000).unwrap().rounded();
        let w = lambda_weights(&f, Precision::Working, 2.0).unwrap();
        // c = 2 gives |w_k| close to d_k / (2n)
        let n = 20_000.0;
        for (k, &v) in w.working().iter().enumerate() {
            let d = if k == 0 || k == 20_000 { 0.5 } else { 1.0 };
            assert!((v.abs() * 2.0 * n / d - 1.0).abs() < 1e-6, "k={k} w={v}");
        }
    }

    #[test]
    fn repeated_nodes_rejected() {
        assert!(NodeFamily::custom(vec![0.0, 1.0, 1.0], 0.0, 2.0).is_err());
        assert!(NodeFamily::custom(vec![0.0, 1.0], 2.0, 3.0).is_err());
        assert!(NodeFamily::custom(vec![0.0, 1.0], 0.0, 1.0).is_ok());
    }

    #[test]
    fn salzer_shape() {
        assert_eq!(salzer_weights(2).unwrap().working(), &[0.5, -1.0, 0.5]);
        assert_eq!(salzer_weights(4).unwrap().working(), &[0.5, -1.0, 1.0, -1.0, 0.5]);
        let w = salzer_weights(7).unwrap();
        for (k, v) in w.working().iter().enumerate() {
            assert_eq!(v.is_sign_negative(), k % 2 == 1);
        }
    }

    #[test]
    fn perturbation_basics() {
        let f = chebyshev_nodes(8).unwrap();
        assert_eq!(perturb_nodes(&f, 0.0, 7).unwrap(), f);
        let p = perturb_nodes(&f, 1e-6, 7).unwrap();
        assert_eq!(p, perturb_nodes(&f, 1e-6, 7).unwrap());
        for (a, b) in f.nodes_wk().iter().zip(p.nodes_wk()) {
            assert!((a - b).abs() <= 1e-6 * a.abs() * (1.0 + 1e-15));
        }
        assert_eq!((p.lo(), p.hi()), (p.nodes_wk()[0], p.nodes_wk()[8]));
        let g = NodeFamily::custom(vec![1.0, 1.001, 2.0], 0.0, 3.0).unwrap();
        assert!((0..20).any(|seed| perturb_nodes(&g, 0.5, seed).is_err()));
    }
}
