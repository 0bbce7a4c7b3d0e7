//! Exact rational arithmetic used as ground truth for small instances.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::hiprec::HiPrec;
use crate::error::{Error, Result};

pub type ExactRational = BigRational;

/// Largest degree accepted by [`eval_second_form_exact`].
pub const MAX_EXACT_DEGREE: usize = 64;

/// Exact value of a finite double.
pub fn from_f64(x: f64) -> ExactRational {
    BigRational::from_float(x).expect("finite double")
}

/// Exact value of `hi + lo`.
pub fn from_hiprec(x: HiPrec) -> ExactRational {
    from_f64(x.hi()) + from_f64(x.lo())
}

pub fn to_f64(x: &ExactRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `|approx - exact| / |exact|` evaluated exactly, then rounded.
pub fn relative_error(approx: &ExactRational, exact: &ExactRational) -> f64 {
    if exact.is_zero() {
        return if approx.is_zero() { 0.0 } else { f64::INFINITY };
    }
    to_f64(&((approx - exact) / exact).abs())
}

pub fn ratio(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact value of the second barycentric formula, with the node-hit branch.
pub fn eval_second_form_exact(
    nodes: &[ExactRational],
    weights: &[ExactRational],
    y: &[ExactRational],
    x: &ExactRational,
) -> Result<ExactRational> {
    let len = nodes.len();
    if weights.len() != len {
        return Err(Error::LengthMismatch { expected: len, actual: weights.len() });
    }
    if y.len() != len {
        return Err(Error::LengthMismatch { expected: len, actual: y.len() });
    }
    if len == 0 {
        return Err(Error::DegenerateFamily);
    }
    if len - 1 > MAX_EXACT_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "exact evaluation limited to degree {MAX_EXACT_DEGREE}"
        )));
    }
    if let Some(k) = nodes.iter().position(|xk| xk == x) {
        return Ok(y[k].clone());
    }
    let mut num = ExactRational::zero();
    let mut den = ExactRational::zero();
    for ((xk, wk), yk) in nodes.iter().zip(weights).zip(y) {
        let t = wk / (x - xk);
        num += &t * yk;
        den += t;
    }
    if den.is_zero() {
        let xf = to_f64(x);
        return Err(Error::Pole { left: xf, right: xf });
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[(i64, i64)]) -> Vec<ExactRational> {
        v.iter().map(|&(a, b)| ratio(a, b)).collect()
    }

    #[test]
    fn squares_on_three_points() {
        let nodes = r(&[(0, 1), (1, 1), (2, 1)]);
        let w = r(&[(1, 2), (-1, 1), (1, 2)]);
        let y = r(&[(0, 1), (1, 1), (4, 1)]);
        let v = eval_second_form_exact(&nodes, &w, &y, &ratio(3, 2)).unwrap();
        assert_eq!(v, ratio(9, 4));
    }

    #[test]
    fn node_hit_and_constants() {
        let nodes = r(&[(-1, 1), (1, 3), (1, 1)]);
        let w = r(&[(2, 7), (-5, 3), (1, 9)]);
        let y = r(&[(3, 1), (-2, 5), (7, 1)]);
        assert_eq!(eval_second_form_exact(&nodes, &w, &y, &ratio(1, 3)).unwrap(), ratio(-2, 5));
        let c = vec![ratio(11, 13); 3];
        assert_eq!(eval_second_form_exact(&nodes, &w, &c, &ratio(-1, 7)).unwrap(), ratio(11, 13));
    }

    #[test]
    fn pole_is_reported() {
        let nodes = r(&[(0, 1), (1, 1)]);
        let w = r(&[(1, 1), (1, 1)]);
        let y = r(&[(0, 1), (1, 1)]);
        assert!(matches!(
            eval_second_form_exact(&nodes, &w, &y, &ratio(1, 2)),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn hiprec_conversion_is_exact() {
        let h = HiPrec::new(1.0, 2f64.powi(-70));
        assert_eq!(from_hiprec(h) - ratio(1, 1), from_f64(2f64.powi(-70)));
    }
}
