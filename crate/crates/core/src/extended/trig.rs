//! The few transcendental values the node constructors need, in double-word
//! precision.

use super::hiprec::HiPrec;

/// π to double-word precision (error below 3e-33).
pub const PI: HiPrec =
    HiPrec::from_parts_unchecked(std::f64::consts::PI, 1.224_646_799_147_353_2e-16);

/// Sine by its Taylor series, for `|t| <= π/2`.
pub fn sin(t: HiPrec) -> HiPrec {
    let t2 = t.square();
    let mut term = t;
    let mut sum = t;
    let mut k = 1.0_f64;
    loop {
        term = -(term * t2).div_f64((2.0 * k) * (2.0 * k + 1.0));
        sum += term;
        if term.abs().hi() <= 1e-35 * sum.abs().hi().max(f64::MIN_POSITIVE) {
            break;
        }
        k += 1.0;
        if k > 60.0 {
            break;
        }
    }
    sum
}

/// `-cos(kπ/n)` evaluated as `sin(π (2k - n) / (2n))`, which keeps the
/// argument in `[-π/2, π/2]` and makes the mirror symmetry about zero exact.
pub fn chebyshev_point(k: usize, n: usize) -> HiPrec {
    let m = 2 * k as i64 - n as i64;
    if m == 0 {
        return HiPrec::ZERO;
    }
    if m.unsigned_abs() as usize == n {
        return HiPrec::from(m.signum() as f64);
    }
    let t = PI.mul_f64(m as f64).div_f64(2.0 * n as f64);
    sin(t)
}
