//! Reference arithmetic: double-word floating point for large runs and exact
//! rationals for small ones.

pub mod hiprec;
pub mod rational;
pub mod trig;

pub use hiprec::{hp_add, hp_div, hp_mul, hp_sub, HiPrec};
pub use rational::{eval_second_form_exact, ExactRational};

use crate::error::{Error, Result};

/// Second barycentric formula in double-word arithmetic.
///
/// Uses the same left-to-right ordering as the working-precision evaluator,
/// so the two paths differ only in precision.
pub fn eval_second_form_hp(
    nodes: &[HiPrec],
    weights: &[HiPrec],
    y: &[HiPrec],
    x: HiPrec,
) -> Result<HiPrec> {
    let len = nodes.len();
    if weights.len() != len {
        return Err(Error::LengthMismatch { expected: len, actual: weights.len() });
    }
    if y.len() != len {
        return Err(Error::LengthMismatch { expected: len, actual: y.len() });
    }
    let mut num = HiPrec::ZERO;
    let mut den = HiPrec::ZERO;
    for k in 0..len {
        if x == nodes[k] {
            return Ok(y[k]);
        }
        let t = weights[k] / (x - nodes[k]);
        num += t * y[k];
        den += t;
    }
    if den.is_zero() {
        return Err(Error::Pole { left: x.to_f64(), right: x.to_f64() });
    }
    Ok(num / den)
}
