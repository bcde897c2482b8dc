//! Double-double floating point.
//!
//! A value is the unevaluated sum `hi + lo` of two `f64`s with
//! `|lo| <= ulp(hi) / 2`, giving roughly 106 bits of significand. The
//! theta kernel needs this: the identities it checks are exact, and at
//! small `t` the quantities involved reach `1e4..1e6`, where a single
//! `f64` ulp is already larger than the residuals being asserted.
//!
//! Products use Dekker splitting rather than `mul_add`, so results do not
//! depend on whether the target has a hardware FMA.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };
    pub const LN_2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };

    #[inline]
    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Builds a normalized value from two components.
    #[inline]
    pub fn from_parts(hi: f64, lo: f64) -> Dd {
        let (hi, lo) = two_sum(hi, lo);
        Dd { hi, lo }
    }

    /// Exact conversion of a 64-bit unsigned integer.
    pub fn from_u64(x: u64) -> Dd {
        let hi_part = (x >> 32) << 32;
        let lo_part = x - hi_part;
        Dd::from_f64(hi_part as f64) + Dd::from_f64(lo_part as f64)
    }

    /// Exact conversion of a 64-bit signed integer.
    pub fn from_i64(x: i64) -> Dd {
        let mag = Dd::from_u64(x.unsigned_abs());
        if x < 0 {
            -mag
        } else {
            mag
        }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn sqr(self) -> Dd {
        self * self
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    /// Multiplication by an exact power of two.
    pub fn ldexp(self, exp: i32) -> Dd {
        let scale = 2f64.powi(exp);
        Dd {
            hi: self.hi * scale,
            lo: self.lo * scale,
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let s = self.hi.sqrt();
        let s_dd = Dd::from_f64(s);
        let residual = self - s_dd.sqr();
        s_dd + Dd::from_f64(residual.hi / (2.0 * s))
    }

    pub fn powi(self, n: i32) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// `self^(k/2)` for a nonnegative integer `k`, the shape of every
    /// `(pi/a)^(n/2)` transform prefactor.
    pub fn pow_half(self, k: u32) -> Dd {
        let whole = self.powi((k / 2) as i32);
        if k % 2 == 1 {
            whole * self.sqrt()
        } else {
            whole
        }
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ONE;
        }
        let k = (self.hi / Dd::LN_2.hi).round();
        let r = self - Dd::LN_2 * Dd::from_f64(k);
        // Shrink the argument so the Taylor series for expm1 converges fast,
        // then undo with (1+y)^2 - 1 = 2y + y^2, which keeps small values exact.
        const HALVINGS: i32 = 10;
        let r = r.ldexp(-HALVINGS);
        let mut term = r;
        let mut y = r;
        for i in 2..=14 {
            term = term * r / Dd::from_f64(i as f64);
            y += term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        for _ in 0..HALVINGS {
            y = y.ldexp(1) + y.sqr();
        }
        let one_plus = Dd::ONE + y;
        // 2^k may be subnormal near the bottom of the range; scale in two steps.
        let k = k as i32;
        if k < -1000 {
            one_plus.ldexp(-1000).ldexp(k + 1000)
        } else {
            one_plus.ldexp(k)
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl From<u64> for Dd {
    fn from(x: u64) -> Dd {
        Dd::from_u64(x)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + Dd::from_f64(q3)
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    fn add(self, rhs: f64) -> Dd {
        self + Dd::from_f64(rhs)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    fn sub(self, rhs: f64) -> Dd {
        self - Dd::from_f64(rhs)
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, rhs: f64) -> Dd {
        self * Dd::from_f64(rhs)
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, rhs: f64) -> Dd {
        self / Dd::from_f64(rhs)
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, rhs: Dd) {
        *self = *self + rhs;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, rhs: Dd) {
        *self = *self - rhs;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, rhs: Dd) {
        *self = *self * rhs;
    }
}

impl Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed at 40 significant digits, split into
    // (nearest f64, residual).
    const EXP_REFERENCE: &[(f64, f64, f64)] = &[
        (-0.3, 0.7408182206817179, -1.805530505953e-18),
        (-1.0, 0.36787944117144233, -1.2428753672788363e-17),
        (-3.0, 0.049787068367863944, -1.4831389691394365e-18),
        (-20.0, 2.061153622438558e-09, -4.19755767595054e-26),
        (-100.0, 3.720075976020836e-44, -1.5705024907732008e-60),
        (-0.6, 0.5488116360940264, 5.544922837237713e-17),
    ];

    #[test]
    fn exp_matches_high_precision_reference() {
        for &(x, hi, lo) in EXP_REFERENCE {
            let got = Dd::from_f64(x).exp();
            let want = Dd::from_parts(hi, lo);
            let rel = ((got - want) / want).abs().to_f64();
            assert!(rel < 1e-29, "exp({x}): rel err {rel:e}");
        }
    }

    #[test]
    fn exp_log_consistency_over_range() {
        for i in -200..200 {
            let x = Dd::from_f64(i as f64 * 0.37);
            let prod = x.exp() * (-x).exp();
            assert!((prod - Dd::ONE).abs().to_f64() < 1e-29, "x = {x:?}");
        }
    }

    #[test]
    fn sqrt_and_division_round_trip() {
        for x in [2.0, 3.0, 0.125, 1e10, 7.77e-5] {
            let r = Dd::from_f64(x).sqrt();
            let back = r.sqr();
            assert!(((back - Dd::from_f64(x)) / Dd::from_f64(x)).abs().to_f64() < 1e-30);
            let q = Dd::ONE / Dd::from_f64(x);
            assert!((q * x - Dd::ONE).abs().to_f64() < 1e-30);
        }
    }

    #[test]
    fn integer_conversion_is_exact() {
        let big = u64::MAX - 12345;
        let d = Dd::from_u64(big);
        let back = d.hi() as i128 + d.lo() as i128;
        assert_eq!(back, big as i128);
        assert_eq!(Dd::from_i64(-7).to_f64(), -7.0);
    }

    #[test]
    fn pi_squared_over_pi_is_pi() {
        let pi2 = Dd::PI * Dd::PI;
        let back = pi2 / Dd::PI;
        assert_eq!(back.to_f64(), std::f64::consts::PI);
    }
}
