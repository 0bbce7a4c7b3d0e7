//! Upper bounds on the backward error, the Lebesgue constant estimator, and
//! the lower-bound certificate.

pub mod certificate;
pub mod lebesgue;

pub use certificate::{lower_bound_certificate, CertificateVerdict, Check, Checks, LowerBoundCertificate};
pub use lebesgue::{lebesgue_constant, lebesgue_function};

use serde::Serialize;

use crate::error::{Error, Result};

/// Unit roundoff assumed by the corollaries.
pub const COROLLARY_EPS: f64 = 2.3e-16;
pub const COROLLARY_MIN_N: usize = 10;
pub const COROLLARY_MAX_N: usize = 2_000_000;

/// Cited Lebesgue constant bounds for rounded Chebyshev nodes:
/// `0.67667 ln n + 1.0236` and `10.841` for `n <= 2e6`.
pub const LEBESGUE_SLOPE: f64 = 0.67667;
pub const LEBESGUE_OFFSET: f64 = 1.0236;
pub const LEBESGUE_MAX: f64 = 10.841;

/// Cited bound on `||zeta|| / (||x - x^|| n^2)` for Salzer's weights.
pub const SALZER_ZETA_NODE: f64 = 2.4624;
/// The same bound with `||x - x^|| <= 2 eps`: `||zeta|| <= 4.9248 eps n^2`.
pub const SALZER_ZETA: f64 = 4.9248;
/// `||zeta|| <= 2.0001 eps n` for numerically computed weights.
pub const NUMERICAL_ZETA: f64 = 2.0001;

pub fn cited_lebesgue_bound(n: usize) -> f64 {
    (LEBESGUE_SLOPE * (n as f64).ln() + LEBESGUE_OFFSET).min(LEBESGUE_MAX)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MainBounds {
    /// `(2n+5) eps / (1 - (2n+5) eps)`
    pub nu: f64,
    /// `(1+L)(delta+Z) / (1 - Z - (delta+Z) L)`
    pub alpha: f64,
    /// `nu + (1+nu) alpha`
    pub beta: f64,
    /// `max(||x - x^||, |x^- - x-|, |x^+ - x+|)`
    pub x_displacement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub z: Option<f64>,
    pub lebesgue_used: f64,
    pub hypothesis_ok: bool,
    /// The inequality that failed, when `hypothesis_ok` is false.
    pub violated: Option<String>,
    pub bounds: Option<MainBounds>,
}

/// Backward-error bounds for the computed second barycentric formula with
/// perturbed nodes and weights.
#[allow(clippy::too_many_arguments)]
pub fn theorem_main_bounds(
    n: usize,
    eps: f64,
    zeta_inf: f64,
    delta: f64,
    lebesgue: f64,
    node_error: f64,
    endpoint_errors: (f64, f64),
) -> BoundReport {
    let refuse = |z: Option<f64>, why: String| BoundReport {
        z,
        lebesgue_used: lebesgue,
        hypothesis_ok: false,
        violated: Some(why),
        bounds: None,
    };
    let inputs = [eps, zeta_inf, delta, lebesgue, node_error, endpoint_errors.0, endpoint_errors.1];
    if inputs.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return refuse(None, "inputs must be finite and nonnegative".into());
    }
    let nf = n as f64;
    let e5 = (2.0 * nf + 5.0) * eps;
    if !(e5 < 1.0) {
        return refuse(None, format!("(2n+5) eps = {e5} < 1"));
    }
    let e2 = (nf + 2.0) * eps;
    let z = (zeta_inf + e2) / (1.0 - e2);
    let lhs = (delta + z) * lebesgue + z;
    if !(lhs < 1.0) {
        return refuse(Some(z), format!("(delta + Z) L + Z = {lhs} < 1"));
    }
    let nu = e5 / (1.0 - e5);
    let alpha = (1.0 + lebesgue) * (delta + z) / (1.0 - z - (delta + z) * lebesgue);
    let beta = nu + (1.0 + nu) * alpha;
    let x_displacement = node_error.max(endpoint_errors.0).max(endpoint_errors.1);
    BoundReport {
        z: Some(z),
        lebesgue_used: lebesgue,
        hypothesis_ok: true,
        violated: None,
        bounds: Some(MainBounds { nu, alpha, beta, x_displacement }),
    }
}

fn check_corollary_range(n: usize, eps: f64) -> Result<()> {
    if !(COROLLARY_MIN_N..=COROLLARY_MAX_N).contains(&n) {
        return Err(Error::OutOfRange(format!(
            "n = {n} outside [{COROLLARY_MIN_N}, {COROLLARY_MAX_N}]"
        )));
    }
    if !(eps > 0.0 && eps <= COROLLARY_EPS) {
        return Err(Error::OutOfRange(format!("eps = {eps} outside (0, {COROLLARY_EPS}]")));
    }
    Ok(())
}

/// `3.7 (3 + ln n) eps n^2`: backward error with Salzer's weights.
pub fn corollary_salzer_bound(n: usize, eps: f64) -> Result<f64> {
    check_corollary_range(n, eps)?;
    let nf = n as f64;
    Ok(3.7 * (3.0 + nf.ln()) * eps * nf * nf)
}

/// `(2.2 ln n + 9.1) eps n`: backward error with numerically computed weights.
pub fn corollary_numerical_bound(n: usize, eps: f64) -> Result<f64> {
    check_corollary_range(n, eps)?;
    let nf = n as f64;
    Ok((2.2 * nf.ln() + 9.1) * eps * nf)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub n: usize,
    pub zeta_bound: f64,
    pub lebesgue_bound: f64,
    pub report: BoundReport,
    pub corollary: f64,
    /// The chained bound does not exceed the corollary's closed form.
    pub dominated: bool,
}

fn chain(n: usize, eps: f64, zeta_bound: f64, corollary: f64) -> ChainReport {
    let lebesgue_bound = cited_lebesgue_bound(n);
    let report = theorem_main_bounds(n, eps, zeta_bound, 0.0, lebesgue_bound, 2.0 * eps, (0.0, 0.0));
    let dominated = report.bounds.is_some_and(|b| b.beta <= corollary);
    ChainReport { n, zeta_bound, lebesgue_bound, report, corollary, dominated }
}

/// Feeds the cited constants (`||zeta|| <= 4.9248 eps n^2`, the Lebesgue
/// bounds, `delta = 0`) through [`theorem_main_bounds`] and compares with
/// [`corollary_salzer_bound`].
pub fn replicate_salzer_chain(n: usize, eps: f64) -> Result<ChainReport> {
    let corollary = corollary_salzer_bound(n, eps)?;
    let nf = n as f64;
    Ok(chain(n, eps, SALZER_ZETA * eps * nf * nf, corollary))
}

/// As [`replicate_salzer_chain`] with `||zeta|| <= 2.0001 eps n`.
pub fn replicate_numerical_chain(n: usize, eps: f64) -> Result<ChainReport> {
    let corollary = corollary_numerical_bound(n, eps)?;
    Ok(chain(n, eps, NUMERICAL_ZETA * eps * n as f64, corollary))
}

/// Bounds under a node perturbation of size `d`: returns the bound on the
/// data perturbation `||beta||` and on the perturbed Lebesgue constant.
pub fn theorem_delta_bounds(d: f64, zeta_inf: f64, lebesgue: f64) -> Result<(f64, f64)> {
    if [d, zeta_inf, lebesgue].iter().any(|v| !(v.is_finite() && *v >= 0.0)) || lebesgue == 0.0 {
        return Err(Error::InvalidParameter("d, zeta and L must be finite, L positive".into()));
    }
    let limit = (1.0 - zeta_inf) / lebesgue - zeta_inf;
    if !(d < limit) {
        return Err(Error::Hypothesis(format!(
            "d = {d} is not below (1 - zeta)/L - zeta = {limit} (margin {})",
            limit - d
        )));
    }
    let den = 1.0 - zeta_inf - (d + zeta_inf) * lebesgue;
    Ok(((d + zeta_inf) * (1.0 + lebesgue) / den, (1.0 + d) * lebesgue / den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_example() {
        let eps = 2.3e-16;
        let r = theorem_main_bounds(10, eps, 0.0, 0.0, 1.0, 0.0, (0.0, 0.0));
        let z = r.z.unwrap();
        assert!((z - 12.0 * eps / (1.0 - 12.0 * eps)).abs() < 1e-30);
        assert!((z - 2.76e-15).abs() < 1e-18);
    }

    #[test]
    fn hypothesis_violation() {
        let r = theorem_main_bounds(10, 2.3e-16, 0.0, 1.0, 2.0, 0.0, (0.0, 0.0));
        assert!(!r.hypothesis_ok && r.bounds.is_none());
        assert!(r.violated.unwrap().contains("(delta + Z) L + Z"));
        let r = theorem_main_bounds(10, 0.1, 0.0, 0.0, 2.0, 0.0, (0.0, 0.0));
        assert!(r.violated.unwrap().contains("(2n+5) eps"));
    }

    #[test]
    fn corollary_values() {
        let eps = 2.3e-16;
        assert!((corollary_salzer_bound(100, eps).unwrap() / 6.472e-11 - 1.0).abs() < 1e-3);
        assert!((corollary_salzer_bound(10, eps).unwrap() / 4.512e-13 - 1.0).abs() < 1e-3);
        assert!((corollary_numerical_bound(100, eps).unwrap() / 4.423e-13 - 1.0).abs() < 1e-3);
        assert!((corollary_numerical_bound(10_000, eps).unwrap() / 6.753e-11 - 1.0).abs() < 1e-3);
        assert!(corollary_salzer_bound(9, eps).is_err());
        assert!(corollary_numerical_bound(100, 3e-16).is_err());
    }

    #[test]
    fn proof_chains_dominated() {
        for n in [10, 100, 1000, 100_000, 2_000_000] {
            let s = replicate_salzer_chain(n, COROLLARY_EPS).unwrap();
            assert!(s.dominated, "{s:?}");
            let r = replicate_numerical_chain(n, COROLLARY_EPS).unwrap();
            assert!(r.dominated, "{r:?}");
        }
        let s = replicate_salzer_chain(100, COROLLARY_EPS).unwrap();
        assert!(s.report.bounds.unwrap().beta <= 6.48e-11);
    }

    #[test]
    fn delta_bounds() {
        assert_eq!(theorem_delta_bounds(0.0, 0.0, 3.0).unwrap(), (0.0, 3.0));
        let (b, _) = theorem_delta_bounds(1e-3, 0.0, 2.0).unwrap();
        assert!((b - 3e-3 / (1.0 - 2e-3)).abs() < 1e-18);
        assert!((b - 3.006e-3).abs() < 1e-6);
        assert!(matches!(theorem_delta_bounds(0.5, 0.0, 2.0), Err(Error::Hypothesis(_))));
    }
}
