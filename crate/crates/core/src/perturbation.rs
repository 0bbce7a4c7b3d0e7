//! Node distortion `delta`, weight distortion `zeta`, and the piecewise
//! linear map `chi` from perturbed to reference nodes.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::extended::hiprec::HiPrec;
use crate::extended::rational::{self, ExactRational};
use crate::nodes::{NodeFamily, WeightSet};

/// Largest degree for which the full `delta_jk` matrix is stored.
pub const MAX_PAIR_DEGREE: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationReport {
    pub n: usize,
    /// Row-major `(n+1) x (n+1)` matrix; entry `j * (n+1) + k` is `delta_jk`.
    pub delta_pairs: Vec<f64>,
    pub delta_lo: Vec<f64>,
    pub delta_hi: Vec<f64>,
    pub delta: f64,
    pub zeta: Vec<f64>,
    pub zeta_inf: f64,
}

impl PerturbationReport {
    pub fn delta_jk(&self, j: usize, k: usize) -> f64 {
        self.delta_pairs[j * (self.n + 1) + k]
    }

    pub fn attach_zeta(&mut self, zeta: Vec<f64>) -> Result<()> {
        if zeta.len() != self.n + 1 {
            return Err(Error::LengthMismatch { expected: self.n + 1, actual: zeta.len() });
        }
        self.zeta_inf = max_abs(&zeta);
        self.zeta = zeta;
        Ok(())
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Common factor that maps `lambda_k / c^n` onto Salzer's normalization for
/// Chebyshev points of the second kind: `(-1)^n n c^n / 2^(n-1)`.
pub fn canonical_rescale(n: usize, diff_scale: f64) -> Result<HiPrec> {
    let half = diff_scale / 2.0;
    let mut f = HiPrec::from(half).powi(n as i32).mul_f64(2.0 * n as f64);
    if n % 2 == 1 {
        f = -f;
    }
    if !f.is_finite() || f.is_zero() {
        return Err(Error::OutOfRange(format!("rescale factor for n = {n}, c = {diff_scale}")));
    }
    Ok(f)
}

/// `zeta_k = (w_k - w^_k) / w^_k` in extended precision, with `w` the
/// reference and `w^` the weights used. With `rescale` the reference is first
/// multiplied by [`canonical_rescale`].
pub fn compute_zeta(reference: &WeightSet, used: &WeightSet, rescale: bool) -> Result<Vec<f64>> {
    if reference.len() != used.len() {
        return Err(Error::LengthMismatch { expected: reference.len(), actual: used.len() });
    }
    let factor = if rescale {
        canonical_rescale(reference.n(), reference.diff_scale())?
    } else {
        HiPrec::ONE
    };
    reference
        .extended()
        .iter()
        .zip(used.extended())
        .enumerate()
        .map(|(k, (&w, &u))| {
            if u.is_zero() {
                return Err(Error::ZeroWeight { index: k });
            }
            Ok(((w * factor - u) / u).to_f64())
        })
        .collect()
}

fn ratio_minus_one(num: HiPrec, den: HiPrec) -> f64 {
    (num / den - HiPrec::ONE).to_f64()
}

fn check_conditions(reference: &NodeFamily, perturbed: &NodeFamily) -> Result<()> {
    let (lo, hi) = (HiPrec::from(reference.lo()), HiPrec::from(reference.hi()));
    let (plo, phi) = (HiPrec::from(perturbed.lo()), HiPrec::from(perturbed.hi()));
    for k in 0..=reference.n() {
        let x = reference.nodes_hi()[k];
        let p = perturbed.nodes_hi()[k];
        if (x > lo && x < hi) != (p > plo && p < phi) {
            return Err(Error::EndpointCondition { index: k, reason: "interior membership differs" });
        }
        if (x == lo) != (p == plo) {
            return Err(Error::EndpointCondition { index: k, reason: "lower endpoint coincidence differs" });
        }
        if (x == hi) != (p == phi) {
            return Err(Error::EndpointCondition { index: k, reason: "upper endpoint coincidence differs" });
        }
    }
    Ok(())
}

/// All `delta_jk`, `delta-_j`, `delta+_j` and their maximum, from extended
/// node values. The `zeta` fields are left empty.
pub fn compute_delta(reference: &NodeFamily, perturbed: &NodeFamily) -> Result<PerturbationReport> {
    let n = reference.n();
    if perturbed.n() != n {
        return Err(Error::LengthMismatch { expected: n + 1, actual: perturbed.n() + 1 });
    }
    if n > MAX_PAIR_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "pair matrix limited to n <= {MAX_PAIR_DEGREE}"
        )));
    }
    check_conditions(reference, perturbed)?;
    let x = reference.nodes_hi();
    let p = perturbed.nodes_hi();
    let mut pairs = vec![0.0; (n + 1) * (n + 1)];
    for j in 0..=n {
        for k in 0..=n {
            if j != k {
                pairs[j * (n + 1) + k] = ratio_minus_one(x[j] - x[k], p[j] - p[k]);
            }
        }
    }
    let endpoint = |e: f64, pe: f64| -> Vec<f64> {
        (0..=n)
            .map(|j| {
                if HiPrec::from(pe) == p[j] {
                    0.0
                } else {
                    ratio_minus_one(HiPrec::from(e) - x[j], HiPrec::from(pe) - p[j])
                }
            })
            .collect()
    };
    let delta_lo = endpoint(reference.lo(), perturbed.lo());
    let delta_hi = endpoint(reference.hi(), perturbed.hi());
    let delta = max_abs(&pairs).max(max_abs(&delta_lo)).max(max_abs(&delta_hi));
    Ok(PerturbationReport {
        n,
        delta_pairs: pairs,
        delta_lo,
        delta_hi,
        delta,
        zeta: Vec::new(),
        zeta_inf: 0.0,
    })
}

/// What a knot of the chi map stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Knot {
    Node(usize),
    Lower,
    Upper,
}

/// Piecewise linear bijection `[x^-, x^+] -> [x-, x+]` taking perturbed nodes
/// and endpoints to reference ones.
///
/// Knots are the nodes plus each endpoint that is not itself a node, in
/// increasing order.
#[derive(Clone, Debug)]
pub struct ChiMap {
    labels: Vec<Knot>,
    source: Vec<HiPrec>,
    target: Vec<HiPrec>,
    slopes: Vec<HiPrec>,
    ref_nodes: Vec<HiPrec>,
    pert_nodes: Vec<HiPrec>,
    domain: (f64, f64),
    range: (f64, f64),
}

impl ChiMap {
    pub fn source_knots(&self) -> &[HiPrec] {
        &self.source
    }

    pub fn target_knots(&self) -> &[HiPrec] {
        &self.target
    }

    pub fn labels(&self) -> &[Knot] {
        &self.labels
    }

    /// `[x^-, x^+]`.
    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// `[x-, x+]`.
    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    /// Index `i` of the segment `[source[i], source[i+1]]` holding `x`.
    fn segment(&self, x: HiPrec) -> usize {
        let i = self.source.partition_point(|&s| s <= x);
        i.clamp(1, self.source.len() - 1) - 1
    }

    fn check_domain(&self, x: HiPrec) -> Result<()> {
        if x < HiPrec::from(self.domain.0) || x > HiPrec::from(self.domain.1) {
            return Err(Error::OutOfRange(format!("{} outside chi domain", x.to_f64())));
        }
        Ok(())
    }

    pub fn eval(&self, x: HiPrec) -> Result<HiPrec> {
        self.check_domain(x)?;
        let i = self.segment(x);
        if x == self.source[i] {
            return Ok(self.target[i]);
        }
        if x == self.source[i + 1] {
            return Ok(self.target[i + 1]);
        }
        Ok(self.target[i] + (x - self.source[i]) * self.slopes[i])
    }

    /// Exact value of the map at a rational point.
    pub fn eval_exact(&self, x: &ExactRational) -> Result<ExactRational> {
        let xf = rational::to_f64(x);
        if !xf.is_finite() {
            return Err(Error::OutOfRange("non-finite point".into()));
        }
        let lo = rational::from_f64(self.domain.0);
        let hi = rational::from_f64(self.domain.1);
        if *x < lo || *x > hi {
            return Err(Error::OutOfRange(format!("{xf} outside chi domain")));
        }
        let src: Vec<ExactRational> = self.source.iter().map(|&s| rational::from_hiprec(s)).collect();
        let i = src.partition_point(|s| s <= x).clamp(1, src.len() - 1) - 1;
        let t0 = rational::from_hiprec(self.target[i]);
        let t1 = rational::from_hiprec(self.target[i + 1]);
        let slope = (t1 - &t0) / (&src[i + 1] - &src[i]);
        Ok(t0 + (x - &src[i]) * slope)
    }
}

/// Builds the chi map; fails unless `delta < 1`.
pub fn build_chi(perturbed: &NodeFamily, reference: &NodeFamily) -> Result<ChiMap> {
    let report = compute_delta(reference, perturbed)?;
    if !(report.delta < 1.0) {
        return Err(Error::Hypothesis(format!("delta = {} is not below one", report.delta)));
    }
    let x = reference.nodes_hi();
    let p = perturbed.nodes_hi();
    let mut knots: Vec<(Knot, HiPrec, HiPrec)> =
        (0..x.len()).map(|k| (Knot::Node(k), p[k], x[k])).collect();
    let (lo, hi) = (HiPrec::from(reference.lo()), HiPrec::from(reference.hi()));
    if !x.contains(&lo) {
        knots.push((Knot::Lower, HiPrec::from(perturbed.lo()), lo));
    }
    if !x.contains(&hi) {
        knots.push((Knot::Upper, HiPrec::from(perturbed.hi()), hi));
    }
    knots.sort_by(|a, b| a.2.partial_cmp(&b.2).expect("finite knots"));
    assemble(knots, x, p, (perturbed.lo(), perturbed.hi()), (reference.lo(), reference.hi()))
}

/// The node-only map `[x^_0, x^_n] -> [x_0, x_n]`, which needs nothing but
/// increasing nodes on both sides. Endpoints are ignored.
pub fn lemma_map(perturbed: &NodeFamily, reference: &NodeFamily) -> Result<ChiMap> {
    if perturbed.n() != reference.n() {
        return Err(Error::LengthMismatch { expected: reference.n() + 1, actual: perturbed.n() + 1 });
    }
    let x = reference.nodes_hi();
    let p = perturbed.nodes_hi();
    let knots = (0..x.len()).map(|k| (Knot::Node(k), p[k], x[k])).collect();
    let n = reference.n();
    let domain = (perturbed.nodes_wk()[0], perturbed.nodes_wk()[n]);
    let range = (reference.nodes_wk()[0], reference.nodes_wk()[n]);
    if HiPrec::from(domain.0) != p[0] || HiPrec::from(domain.1) != p[n] {
        return Err(Error::InvalidParameter("extreme perturbed nodes must be doubles".into()));
    }
    assemble(knots, x, p, domain, range)
}

fn assemble(
    knots: Vec<(Knot, HiPrec, HiPrec)>,
    ref_nodes: &[HiPrec],
    pert_nodes: &[HiPrec],
    domain: (f64, f64),
    range: (f64, f64),
) -> Result<ChiMap> {
    for w in knots.windows(2) {
        if !(w[0].1 < w[1].1) {
            return Err(Error::Hypothesis("perturbed knots are not increasing".into()));
        }
    }
    let labels = knots.iter().map(|k| k.0).collect();
    let source: Vec<HiPrec> = knots.iter().map(|k| k.1).collect();
    let target: Vec<HiPrec> = knots.iter().map(|k| k.2).collect();
    let slopes = (0..source.len() - 1)
        .map(|i| (target[i + 1] - target[i]) / (source[i + 1] - source[i]))
        .collect();
    Ok(ChiMap {
        labels,
        source,
        target,
        slopes,
        ref_nodes: ref_nodes.to_vec(),
        pert_nodes: pert_nodes.to_vec(),
        domain,
        range,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Distortion {
    /// `max_j |(chi(x) - x_j) / (x^ - x^_j) - 1|`.
    pub value: f64,
    /// Largest per-node bound from the segment's two knots.
    pub bound: f64,
    /// The knots bracketing the point.
    pub segment: (Knot, Knot),
    /// Every node satisfied its bound, up to the extended-precision error.
    pub within: bool,
}

fn knot_delta(report: &PerturbationReport, j: usize, knot: Knot) -> f64 {
    match knot {
        Knot::Node(k) => report.delta_jk(j, k),
        Knot::Lower => report.delta_lo[j],
        Knot::Upper => report.delta_hi[j],
    }
}

/// Gap distortion of `chi` at `x` together with the segment bound
/// `max(|delta at left knot|, |delta at right knot|)` for every node.
pub fn chi_distortion(map: &ChiMap, report: &PerturbationReport, x: f64) -> Result<Distortion> {
    if report.n + 1 != map.ref_nodes.len() {
        return Err(Error::LengthMismatch { expected: map.ref_nodes.len(), actual: report.n + 1 });
    }
    let xh = HiPrec::from(x);
    if map.pert_nodes.contains(&xh) {
        return Err(Error::InvalidParameter(format!("{x} is a node")));
    }
    let chi = map.eval(xh)?;
    let i = map.segment(xh);
    let segment = (map.labels[i], map.labels[i + 1]);
    let mut value = 0.0_f64;
    let mut bound = 0.0_f64;
    let mut within = true;
    for j in 0..map.ref_nodes.len() {
        let gap = xh - map.pert_nodes[j];
        let h = ((chi - map.ref_nodes[j]) / gap - HiPrec::ONE).abs().to_f64();
        let b = knot_delta(report, j, segment.0).abs().max(knot_delta(report, j, segment.1).abs());
        // extended-precision error of chi, amplified by the gap
        let slack = 1e-30 * (chi.abs().to_f64() + map.ref_nodes[j].abs().to_f64()) / gap.abs().to_f64()
            + 4.0 * f64::EPSILON * b;
        within &= h <= b + slack;
        value = value.max(h);
        bound = bound.max(b);
    }
    Ok(Distortion { value, bound, segment, within })
}

/// `max_j |(chi(x) - x_j) / (x^ - x^_j) - 1|` computed exactly.
pub fn chi_distortion_exact(map: &ChiMap, x: &ExactRational) -> Result<ExactRational> {
    let chi = map.eval_exact(x)?;
    let mut best = ExactRational::zero();
    for (xj, pj) in map.ref_nodes.iter().zip(&map.pert_nodes) {
        let gap = x - rational::from_hiprec(*pj);
        if gap.is_zero() {
            return Err(Error::InvalidParameter("point is a node".into()));
        }
        let h = (&chi - rational::from_hiprec(*xj)) / gap - ExactRational::from_integer(1.into());
        let h = if h < ExactRational::zero() { -h } else { h };
        if h > best {
            best = h;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes::{chebyshev_nodes, lambda_weights, salzer_weights, Precision};

    fn fam(v: &[f64], lo: f64, hi: f64) -> NodeFamily {
        NodeFamily::custom(v.to_vec(), lo, hi).unwrap()
    }

    #[test]
    fn delta_example() {
        let x = fam(&[0.0, 1.0, 2.0], 0.0, 2.0);
        let p = fam(&[0.0, 1.0, 2.0002], 0.0, 2.0002);
        let r = compute_delta(&x, &p).unwrap();
        assert!((r.delta_jk(0, 2) - (2.0 / 2.0002 - 1.0)).abs() < 1e-15);
        assert!((r.delta - (1.0 / 1.0002 - 1.0_f64).abs()).abs() < 1e-15);
        assert!((r.delta - 2.0e-4).abs() < 1e-7);
        for k in 0..3 {
            assert_eq!(r.delta_jk(k, k), 0.0);
        }
        assert_eq!(r.delta_lo[0], 0.0);
        assert_eq!(r.delta_hi[2], 0.0);
        assert_eq!(compute_delta(&x, &x).unwrap().delta, 0.0);
    }

    #[test]
    fn biconditional_violation_names_index() {
        let x = fam(&[0.0, 1.0, 2.0], 0.0, 2.0);
        let p = fam(&[0.0, 1.0, 2.0002], 0.0, 2.0);
        assert!(matches!(compute_delta(&x, &p), Err(Error::EndpointCondition { index: 2, .. })));
    }

    #[test]
    fn zeta_identity_and_salzer_order() {
        let f = chebyshev_nodes(100).unwrap().rounded();
        let r = lambda_weights(&f, Precision::Extended, 2.0).unwrap();
        assert!(compute_zeta(&r, &r, false).unwrap().iter().all(|&z| z == 0.0));
        let z = compute_zeta(&r, &salzer_weights(100).unwrap(), true).unwrap();
        let ratio = max_abs(&z) / (f64::EPSILON * 1e4);
        assert!(ratio > 0.070 / 4.0 && ratio < 0.070 * 4.0, "{ratio}");
        let odd = chebyshev_nodes(7).unwrap();
        let r = lambda_weights(&odd, Precision::Extended, 2.0).unwrap();
        let z = compute_zeta(&r, &salzer_weights(7).unwrap(), true).unwrap();
        assert!(max_abs(&z) < 1e-14, "{z:?}");
    }

    #[test]
    fn single_segment_chi() {
        let p = fam(&[0.0, 1.0], 0.0, 1.0);
        let x = fam(&[0.0, 2.0], 0.0, 2.0);
        // delta_01 = 1 fails the corollary hypothesis but not the lemma
        assert!(matches!(build_chi(&p, &x), Err(Error::Hypothesis(_))));
        let m = lemma_map(&p, &x).unwrap();
        assert_eq!(m.eval(HiPrec::from(0.5)).unwrap(), HiPrec::from(1.0));
        let r = compute_delta(&x, &p).unwrap();
        let d = chi_distortion(&m, &r, 0.5).unwrap();
        assert_eq!(d.value, 1.0);
        assert_eq!(r.delta_jk(0, 1), 1.0);
        assert!(d.within);
        assert_eq!(d.segment, (Knot::Node(0), Knot::Node(1)));

        let x = fam(&[0.0, 1.5], 0.0, 1.5);
        let m = build_chi(&p, &x).unwrap();
        assert_eq!(m.eval(HiPrec::from(0.5)).unwrap(), HiPrec::from(0.75));
    }

    #[test]
    fn identity_chi() {
        let f = fam(&[-1.0, -0.2, 0.5, 1.0], -0.7, 0.9);
        let m = build_chi(&f, &f).unwrap();
        assert_eq!(m.labels().len(), 6);
        for x in [-0.7, -0.5, 0.0, 0.3, 0.9] {
            assert_eq!(m.eval(HiPrec::from(x)).unwrap(), HiPrec::from(x));
        }
        let r = compute_delta(&f, &f).unwrap();
        assert_eq!(chi_distortion(&m, &r, 0.3).unwrap().value, 0.0);
        assert!(m.eval(HiPrec::from(0.95)).is_err());
    }
}
