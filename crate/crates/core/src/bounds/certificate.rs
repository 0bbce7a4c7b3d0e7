use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::hiprec::HiPrec;
use crate::nodes::WeightSet;
use crate::perturbation::{compute_zeta, max_abs};

/// Guaranteed fraction of `||zeta||` in the lower bound.
pub const LOWER_BOUND_FACTOR: f64 = 0.16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Check {
    /// `2.5 (n+3) eps <= ||zeta|| <= 0.001`
    ZetaRange,
    /// `|zeta_k| = ||zeta||`
    ZetaMaximal,
    /// `zeta_k zeta_j <= 0`
    OppositeSigns,
    /// `0 < |(x - x_j)/w_j| S <= 0.01`
    ScaledDistance,
    /// `sup_{i != j} |(x - x_j)/(x_i - x_j)| < 0.01`
    RelativeDistance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Checks {
    pub zeta_inf: f64,
    pub zeta_range: bool,
    pub zeta_maximal: bool,
    pub opposite_signs: bool,
    /// `|(x - x_j)/w_j| S`
    pub scaled_distance: f64,
    pub scaled_distance_ok: bool,
    pub relative_distance: f64,
    pub relative_distance_ok: bool,
}

impl Checks {
    pub fn first_failed(&self) -> Option<Check> {
        [
            (self.zeta_range, Check::ZetaRange),
            (self.zeta_maximal, Check::ZetaMaximal),
            (self.opposite_signs, Check::OppositeSigns),
            (self.scaled_distance_ok, Check::ScaledDistance),
            (self.relative_distance_ok, Check::RelativeDistance),
        ]
        .into_iter()
        .find(|c| !c.0)
        .map(|c| c.1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBoundCertificate {
    pub s: f64,
    pub j: usize,
    pub k: usize,
    pub x: f64,
    pub checks: Checks,
    pub guaranteed_beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum CertificateVerdict {
    Issued(LowerBoundCertificate),
    Refused { failed: Check, checks: Checks },
}

impl CertificateVerdict {
    pub fn issued(&self) -> Option<&LowerBoundCertificate> {
        match self {
            Self::Issued(c) => Some(c),
            Self::Refused { .. } => None,
        }
    }
}

/// `S = sum_{i != j} |w_i| / |x_j - x_i|` with reference weights.
pub fn lb_sum(nodes: &[f64], reference: &[HiPrec], j: usize) -> HiPrec {
    let xj = nodes[j];
    let mut s = HiPrec::ZERO;
    for (i, (&xi, &wi)) in nodes.iter().zip(reference).enumerate() {
        if i != j {
            s += wi.abs() / HiPrec::diff(xj, xi).abs();
        }
    }
    s
}

/// Checks the hypotheses of the lower bound `|beta_k| >= 0.16 ||zeta||` at
/// `(j, k, x)`.
///
/// `reference` must already be on the same scale as `used`, since `zeta` is
/// formed without rescaling.
pub fn lower_bound_certificate(
    nodes: &[f64],
    used: &WeightSet,
    reference: &WeightSet,
    j: usize,
    k: usize,
    x: f64,
    eps: f64,
) -> Result<CertificateVerdict> {
    let len = nodes.len();
    if used.len() != len || reference.len() != len {
        return Err(Error::LengthMismatch { expected: len, actual: used.len().min(reference.len()) });
    }
    if j >= len || k >= len {
        return Err(Error::IndexOutOfRange { index: j.max(k), n: len - 1 });
    }
    let n = len - 1;
    let zeta = compute_zeta(reference, used, false)?;
    let zeta_inf = max_abs(&zeta);
    let zeta_range = 2.5 * (n as f64 + 3.0) * eps <= zeta_inf && zeta_inf <= 0.001;
    let zeta_maximal = zeta[k].abs() == zeta_inf;
    let opposite_signs = zeta[k] * zeta[j] <= 0.0;

    let w = reference.extended();
    let s = lb_sum(nodes, w, j);
    let dx = HiPrec::diff(x, nodes[j]);
    let scaled = (dx / w[j]).abs() * s;
    let scaled_distance = scaled.to_f64();
    let scaled_distance_ok = !scaled.is_zero() && scaled <= HiPrec::from(0.01);

    let mut rel = HiPrec::ZERO;
    for (i, &xi) in nodes.iter().enumerate() {
        if i != j {
            let r = (dx / HiPrec::diff(xi, nodes[j])).abs();
            if r > rel {
                rel = r;
            }
        }
    }
    let relative_distance = rel.to_f64();
    let relative_distance_ok = rel < HiPrec::from(0.01);

    let checks = Checks {
        zeta_inf,
        zeta_range,
        zeta_maximal,
        opposite_signs,
        scaled_distance,
        scaled_distance_ok,
        relative_distance,
        relative_distance_ok,
    };
    Ok(match checks.first_failed() {
        Some(failed) => CertificateVerdict::Refused { failed, checks },
        None => CertificateVerdict::Issued(LowerBoundCertificate {
            s: s.to_f64(),
            j,
            k,
            x,
            checks,
            guaranteed_beta: LOWER_BOUND_FACTOR * zeta_inf,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_example() {
        let w: Vec<HiPrec> = [0.5, -1.0, 0.5].iter().copied().map(HiPrec::from).collect();
        assert_eq!(lb_sum(&[-1.0, 0.0, 1.0], &w, 1), HiPrec::ONE);
    }

    #[test]
    fn zero_zeta_is_refused() {
        let w = WeightSet::custom(vec![0.5, -1.0, 0.5]).unwrap();
        let v = lower_bound_certificate(&[-1.0, 0.0, 1.0], &w, &w, 1, 0, 1e-17, f64::EPSILON).unwrap();
        assert!(matches!(v, CertificateVerdict::Refused { failed: Check::ZetaRange, .. }));
    }

    #[test]
    fn all_checks_pass_on_crafted_case() {
        let used = WeightSet::custom(vec![0.5, -1.0, 0.5]).unwrap();
        let reference = WeightSet::custom(vec![0.5 * (1.0 + 1e-4), -(1.0 - 5e-5), 0.5]).unwrap();
        let v = lower_bound_certificate(&[-1.0, 0.0, 1.0], &used, &reference, 1, 0, 1e-6, f64::EPSILON).unwrap();
        let c = v.issued().expect("issued");
        assert!((c.guaranteed_beta - 0.16e-4).abs() < 1e-12);
    }
}
