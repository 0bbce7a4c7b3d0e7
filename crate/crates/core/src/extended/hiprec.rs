//! Double-word ("double-double") arithmetic.
//!
//! A [`HiPrec`] stores a value as the unevaluated sum `hi + lo` of two `f64`s
//! with `|lo| <= ulp(hi) / 2`. Every operation is assembled from the
//! error-free transformations [`two_sum`], [`fast_two_sum`] and [`two_prod`];
//! the per-operation relative error is a small multiple of `u^2 = 2^-106`
//! (about `1.2e-32`). The algorithms are the "accurate" double-word variants
//! of Joldes, Muller and Popescu (ACM TOMS 2017).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Exact sum: returns `(s, e)` with `s = fl(a + b)` and `s + e = a + b`.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Exact sum when `|a| >= |b|` (or `a == 0`).
#[inline]
pub fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Exact product: returns `(p, e)` with `p = fl(a * b)` and `p + e = a * b`,
/// barring underflow of `e`.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Multiplies `x` by `2^k` exactly (barring overflow or underflow of the result).
pub fn ldexp(mut x: f64, mut k: i32) -> f64 {
    while k > 1000 {
        x *= f64::from_bits(((1000 + 1023) as u64) << 52);
        k -= 1000;
    }
    while k < -1000 {
        x *= f64::from_bits(((1023 - 1000) as u64) << 52);
        k += 1000;
    }
    x * f64::from_bits(((k + 1023) as u64) << 52)
}

/// Binary exponent `e` with `2^(e-1) <= |x| < 2^e` for normal `x`; 0 for zero
/// and non-finite input.
pub fn exponent(x: f64) -> i32 {
    if x == 0.0 || !x.is_finite() {
        return 0;
    }
    let biased = ((x.to_bits() >> 52) & 0x7ff) as i32;
    if biased == 0 {
        // subnormal
        return exponent(x * f64::from_bits(((64 + 1023) as u64) << 52)) - 64;
    }
    biased - 1022
}

#[derive(Clone, Copy, Debug, Default)]
pub struct HiPrec {
    hi: f64,
    lo: f64,
}

/// Packs a result; once the leading part has overflowed (or is NaN) the
/// error term is meaningless and the leading part alone is returned.
#[inline]
fn finish(lead: f64, hi: f64, lo: f64) -> HiPrec {
    if lead.is_finite() {
        HiPrec { hi, lo }
    } else {
        HiPrec { hi: lead, lo: 0.0 }
    }
}

impl HiPrec {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    /// Builds a normalized value from an arbitrary pair of doubles.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        finish(h, h, l)
    }

    /// Caller guarantees `|lo| <= ulp(hi) / 2`.
    pub(crate) const fn from_parts_unchecked(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    /// Exact difference `a - b` of two doubles.
    #[inline]
    pub fn diff(a: f64, b: f64) -> Self {
        let (h, l) = two_sum(a, -b);
        finish(h, h, l)
    }

    /// Exact product `a * b` of two doubles.
    #[inline]
    pub fn product(a: f64, b: f64) -> Self {
        let (h, l) = two_prod(a, b);
        finish(h, h, l)
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Nearest double to the represented value.
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    #[inline]
    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.is_sign_negative() {
            -self
        } else {
            self
        }
    }

    /// `self * 2^k`, exact unless the result leaves the normal range.
    #[inline]
    pub fn mul_pow2(self, k: i32) -> Self {
        Self {
            hi: ldexp(self.hi, k),
            lo: ldexp(self.lo, k),
        }
    }

    #[inline]
    pub fn add_f64(self, y: f64) -> Self {
        let (sh, sl) = two_sum(self.hi, y);
        let v = self.lo + sl;
        let (h, l) = fast_two_sum(sh, v);
        finish(sh, h, l)
    }

    #[inline]
    pub fn mul_f64(self, y: f64) -> Self {
        let (ch, cl1) = two_prod(self.hi, y);
        let cl3 = self.lo.mul_add(y, cl1);
        let (h, l) = fast_two_sum(ch, cl3);
        finish(ch, h, l)
    }

    #[inline]
    pub fn div_f64(self, y: f64) -> Self {
        let th = self.hi / y;
        let (ph, pl) = two_prod(th, y);
        let dh = self.hi - ph;
        let dt = dh - pl;
        let d = dt + self.lo;
        let tl = d / y;
        let (h, l) = fast_two_sum(th, tl);
        finish(th, h, l)
    }

    /// Division that reports a zero divisor instead of producing infinity.
    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self / rhs)
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn square(self) -> Self {
        self * self
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, mut k: i32) -> Self {
        if k < 0 {
            return self.powi(-k).recip();
        }
        let mut base = self;
        let mut acc = Self::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base = base.square();
            k >>= 1;
        }
        acc
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal(self, digits: usize) -> String {
        if !self.is_finite() {
            return format!("{}", self.hi);
        }
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.is_sign_negative();
        let mut r = self.abs();
        let mut e = r.hi.log10().floor() as i32;
        r = r / Self::from(10.0).powi(e);
        while r.hi >= 10.0 {
            r = r.div_f64(10.0);
            e += 1;
        }
        while r.hi < 1.0 {
            r = r.mul_f64(10.0);
            e -= 1;
        }
        let mut out: Vec<u8> = Vec::with_capacity(digits);
        for _ in 0..digits {
            let mut d = r.hi.floor();
            if (r - Self::from(d)).is_sign_negative() {
                d -= 1.0;
            }
            let d = d.clamp(0.0, 9.0);
            out.push(d as u8);
            r = (r - Self::from(d)).mul_f64(10.0);
        }
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push((b'0' + out[0]) as char);
        if digits > 1 {
            s.push('.');
            for d in &out[1..] {
                s.push((b'0' + d) as char);
            }
        }
        s.push_str(&format!("e{e}"));
        s
    }
}

impl From<f64> for HiPrec {
    #[inline]
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

impl PartialEq for HiPrec {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for HiPrec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Neg for HiPrec {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for HiPrec {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let (sh, sl) = two_sum(self.hi, rhs.hi);
        let (th, tl) = two_sum(self.lo, rhs.lo);
        let c = sl + th;
        let (vh, vl) = fast_two_sum(sh, c);
        let w = tl + vl;
        let (h, l) = fast_two_sum(vh, w);
        finish(sh, h, l)
    }
}

impl Sub for HiPrec {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for HiPrec {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (ch, cl1) = two_prod(self.hi, rhs.hi);
        let tl0 = self.lo * rhs.lo;
        let tl1 = self.hi.mul_add(rhs.lo, tl0);
        let cl2 = self.lo.mul_add(rhs.hi, tl1);
        let cl3 = cl1 + cl2;
        let (h, l) = fast_two_sum(ch, cl3);
        finish(ch, h, l)
    }
}

impl Div for HiPrec {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let th = self.hi / rhs.hi;
        let r = rhs.mul_f64(th);
        let pi_h = self.hi - r.hi;
        let dl = self.lo - r.lo;
        let d = pi_h + dl;
        let tl = d / rhs.hi;
        let (h, l) = fast_two_sum(th, tl);
        finish(th, h, l)
    }
}

impl AddAssign for HiPrec {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for HiPrec {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for HiPrec {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl fmt::Display for HiPrec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(32))
    }
}

pub fn hp_add(a: HiPrec, b: HiPrec) -> HiPrec {
    a + b
}

pub fn hp_sub(a: HiPrec, b: HiPrec) -> HiPrec {
    a - b
}

pub fn hp_mul(a: HiPrec, b: HiPrec) -> HiPrec {
    a * b
}

pub fn hp_div(a: HiPrec, b: HiPrec) -> Result<HiPrec> {
    a.checked_div(b)
}
