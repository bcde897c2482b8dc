//! Theta series at `tau = i t / pi`.
//!
//! Two nome conventions appear: the Jacobi nullwerte use `q = e^{-t}` and
//! the Eisenstein series uses `Q = q^2 = e^{-2t}`. Every function here takes
//! the real argument `t` and converts at entry; [`QSeries`] stores all
//! exponents in powers of `q`.
//!
//! Values are accumulated in double-double arithmetic so that exact
//! identities between quantities of size `10^6` still resolve residuals
//! far below `10^-12`.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::lattice::{
    e8, e8_plus_zn, enumerate_shells_with, zn, EnumerationOptions, Lattice, ShellSeries,
};

/// Terms are added until the next one falls below this fraction of the
/// partial sum.
pub const TRUNCATION_RELATIVE: f64 = 1e-32;

/// Default absolute tolerance for the shell-series tail.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-24;

/// Relative rounding error per accumulated double-double operation.
const DD_UNIT: f64 = 1.3e-32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaKind {
    Two,
    Three,
    Four,
}

impl ThetaKind {
    pub fn from_index(kind: u8) -> Result<ThetaKind> {
        match kind {
            2 => Ok(ThetaKind::Two),
            3 => Ok(ThetaKind::Three),
            4 => Ok(ThetaKind::Four),
            other => Err(Error::InvalidParameter(format!(
                "theta kind must be 2, 3 or 4, got {other}"
            ))),
        }
    }
}

/// A real evaluation with a certified absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaValue {
    value: Dd,
    abs_error: f64,
    t: f64,
}

impl ThetaValue {
    pub fn new(value: Dd, abs_error: f64, t: f64) -> ThetaValue {
        ThetaValue {
            value,
            abs_error,
            t,
        }
    }

    pub fn value(&self) -> f64 {
        self.value.to_f64()
    }

    /// The double-double value; its low word carries digits beyond `f64`.
    pub fn precise(&self) -> Dd {
        self.value
    }

    pub fn abs_error(&self) -> f64 {
        self.abs_error
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

impl Serialize for ThetaValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ValueJson {
            value: self.value(),
            abs_error: self.abs_error,
        }
        .serialize(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueJson {
    pub value: f64,
    pub abs_error: f64,
}

/// A truncated `q`-series `sum c_k q^{e_k}` at a fixed `q = e^{-t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QSeries {
    /// `(exponent, coefficient)` with strictly increasing exponents.
    pub coeffs: Vec<(Ratio<i64>, f64)>,
    /// Bound on the absolute value of all omitted terms at `q_value`.
    pub tail_bound: f64,
    pub q_value: f64,
    t: Dd,
}

impl QSeries {
    /// Nullwert series of the given kind at `q = e^{-t}`.
    pub fn jacobi(kind: ThetaKind, t: f64) -> Result<QSeries> {
        check_t(t)?;
        let td = Dd::from_f64(t);
        let mut coeffs = Vec::new();
        let mut sum = 0.0;
        // Exponents (m + s)^2 for m >= 0 with the +-m pair folded together.
        let (shift_num, shift_den) = match kind {
            ThetaKind::Two => (1i64, 2i64),
            _ => (0, 1),
        };
        let mut m = 0i64;
        loop {
            let num = (m * shift_den + shift_num).pow(2);
            let den = shift_den * shift_den;
            let e = Ratio::new(num, den);
            let mult = if kind != ThetaKind::Two && m == 0 {
                1.0
            } else {
                2.0
            };
            let sign = if kind == ThetaKind::Four && m % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            let term = mult * (-t * num as f64 / den as f64).exp();
            if m > 0 && term < TRUNCATION_RELATIVE * sum {
                // Omitted terms form a series with ratio at most q^{2(m+s)+1}.
                let ratio =
                    (-t * (2.0 * (m as f64 + shift_num as f64 / shift_den as f64) + 1.0)).exp();
                let tail_bound = term / (1.0 - ratio);
                return Ok(QSeries {
                    coeffs,
                    tail_bound,
                    q_value: (-t).exp(),
                    t: td,
                });
            }
            coeffs.push((e, sign * mult));
            sum += term;
            m += 1;
        }
    }

    /// `E4 = 1 + 240 sum sigma_3(m) Q^m` written in powers of `q = Q^{1/2}`.
    pub fn eisenstein_e4(t: f64) -> Result<QSeries> {
        check_t(t)?;
        let big_q = (-2.0 * t).exp();
        let mut coeffs = vec![(Ratio::from_integer(0), 1.0)];
        let mut sum = 1.0;
        let mut m = 1u64;
        loop {
            let term_bound = 240.0 * (m as f64).powi(4) * big_q.powi(m as i32);
            // sigma_3(j) <= j^4 and ((j+1)/j)^4 Q is decreasing, so the tail
            // from m on is geometric once that ratio drops below one.
            let ratio = ((m + 1) as f64 / m as f64).powi(4) * big_q;
            if ratio < 1.0 && term_bound < TRUNCATION_RELATIVE * sum {
                return Ok(QSeries {
                    coeffs,
                    tail_bound: term_bound / (1.0 - ratio),
                    q_value: (-t).exp(),
                    t: Dd::from_f64(t),
                });
            }
            let c = 240.0 * sigma3(m) as f64;
            coeffs.push((Ratio::from_integer(2 * m as i64), c));
            sum += c * big_q.powi(m as i32);
            m += 1;
        }
    }

    pub fn evaluate(&self) -> ThetaValue {
        let mut total = Dd::ZERO;
        let mut magnitude = 0.0;
        for (e, c) in &self.coeffs {
            let x = (-(self.t * *e.numer() as f64) / *e.denom() as f64).exp() * *c;
            magnitude += x.to_f64().abs();
            total += x;
        }
        let rounding = DD_UNIT * magnitude * (self.coeffs.len() as f64 + 4.0);
        ThetaValue::new(total, self.tail_bound + rounding, self.t.to_f64())
    }
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "t must be a positive real, got {t}"
        )))
    }
}

/// Sum of cubes of the divisors of `m`, by trial division to `sqrt(m)`.
pub fn sigma3(m: u64) -> u64 {
    let mut total = 0u64;
    let mut d = 1u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            total += d.pow(3);
            let e = m / d;
            if e != d {
                total += e.pow(3);
            }
        }
        d += 1;
    }
    total
}

pub fn jacobi_theta(kind: ThetaKind, t: f64) -> Result<ThetaValue> {
    Ok(QSeries::jacobi(kind, t)?.evaluate())
}

pub fn eisenstein_e4(t: f64) -> Result<ThetaValue> {
    Ok(QSeries::eisenstein_e4(t)?.evaluate())
}

/// `prod_{m>=1} (1 - q^{2m})(1 - q^{2m-1})^2` at `q = e^{-t}`.
pub fn theta4_product(t: f64) -> Result<ThetaValue> {
    check_t(t)?;
    let td = Dd::from_f64(t);
    let mut total = Dd::ONE;
    let mut m = 1u64;
    loop {
        let q_odd = (-(td * (2 * m - 1) as f64)).exp();
        let q_even = (-(td * (2 * m) as f64)).exp();
        let one_minus_odd = Dd::ONE - q_odd;
        total *= (Dd::ONE - q_even) * one_minus_odd * one_minus_odd;
        if q_odd.to_f64() < TRUNCATION_RELATIVE {
            // Omitted factors lie in [1 - 3 sum_{j>2m} q^j, 1].
            let q = (-t).exp();
            let rest = 3.0 * (-t * (2 * m + 1) as f64).exp() / (1.0 - q);
            let error = total.to_f64() * rest + DD_UNIT * total.to_f64() * (4 * m) as f64;
            return Ok(ThetaValue::new(total, error, t));
        }
        m += 1;
    }
}

/// Bound on `sum_{m > max_norm} r(m) e^{-t m}` for any integral lattice of
/// dimension `dim`, using `r(m) <= (2 sqrt(m) + 1)^dim`.
pub fn shell_tail_bound(dim: usize, t: f64, max_norm: u64) -> f64 {
    let n = dim as f64;
    let log_f = |m: f64| n * (2.0 * m.sqrt() + 1.0).ln() - t * m;
    let mut total = 0.0;
    let mut m = max_norm as f64 + 1.0;
    loop {
        let f = log_f(m).exp();
        // The ratio f(m+1)/f(m) decreases in m, so once it is below one the
        // remainder is dominated by a geometric series.
        let ratio = (log_f(m + 1.0) - log_f(m)).exp();
        if ratio < 0.99 {
            return total + f / (1.0 - ratio);
        }
        total += f;
        m += 1.0;
        if !total.is_finite() || m > max_norm as f64 + 1e7 {
            return f64::INFINITY;
        }
    }
}

/// Smallest `M` with [`shell_tail_bound`]`(dim, t, M) <= tol`.
pub fn required_max_norm(dim: usize, t: f64, tol: f64) -> Result<u64> {
    check_t(t)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut hi = 1u64;
    while shell_tail_bound(dim, t, hi) > tol {
        hi *= 2;
        if hi > 1 << 40 {
            return Err(Error::InvalidParameter(format!(
                "no feasible truncation for dim {dim}, t {t}, tol {tol}"
            )));
        }
    }
    let mut lo = 0u64;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if shell_tail_bound(dim, t, mid) <= tol {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// `sum_m r(m) e^{-t m}` with the tail certified below `tol`.
pub fn theta_from_shells(shells: &ShellSeries, t: f64, tol: f64) -> Result<ThetaValue> {
    check_t(t)?;
    if shells.dim() == 0 {
        return Err(Error::InvalidParameter(
            "shell series does not record its dimension".into(),
        ));
    }
    let required = required_max_norm(shells.dim(), t, tol)?;
    if required > shells.max_norm() {
        return Err(Error::InsufficientShells {
            available: shells.max_norm(),
            required,
        });
    }
    let total = shell_sum(shells, Dd::from_f64(t));
    let terms = shells.counts().iter().filter(|&&c| c > 0).count();
    let tail = shell_tail_bound(shells.dim(), t, shells.max_norm());
    let rounding = DD_UNIT * total.to_f64() * (terms as f64 + 4.0);
    Ok(ThetaValue::new(total, tail + rounding, t))
}

/// `sum_{m <= M} r(m) e^{-t m}` without any tail.
pub fn shell_sum(shells: &ShellSeries, t: Dd) -> Dd {
    shells
        .counts()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(m, &c)| (-(t * m as f64)).exp() * Dd::from_u64(c))
        .sum()
}

/// Enumerates exactly as many shells as `tol` requires and sums them.
pub fn lattice_theta(
    lattice: &Lattice,
    t: f64,
    tol: f64,
    options: EnumerationOptions,
) -> Result<ThetaValue> {
    let max_norm = required_max_norm(lattice.dim(), t, tol)?;
    let shells = enumerate_shells_with(lattice, max_norm, options)?;
    theta_from_shells(&shells, t, tol)
}

/// Residuals of the modular identities at one `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub t: f64,
    /// Absolute residuals keyed by identity name.
    pub identities: BTreeMap<String, f64>,
    pub values: BTreeMap<String, ThetaValue>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.identities
            .iter()
            .filter(|(k, _)| k.as_str() != POSITIVITY_MARGIN)
            .map(|(_, &v)| v)
            .fold(0.0, f64::max)
    }

    pub fn positivity_margin(&self) -> f64 {
        self.identities[POSITIVITY_MARGIN]
    }
}

pub const POSITIVITY_MARGIN: &str = "positivity_margin";

/// Glaisher, Jacobi's abstruse identity, the `Z^8 - E8` gap formula,
/// `Theta_E8 = E4`, multiplicativity over `E8 + Z^4`, and the margin
/// `theta_2^4 theta_4^4 > 0`.
pub fn identity_suite(t: f64) -> Result<IdentityReport> {
    identity_suite_with(t, EnumerationOptions::default())
}

pub fn identity_suite_with(t: f64, options: EnumerationOptions) -> Result<IdentityReport> {
    check_t(t)?;
    let th2 = jacobi_theta(ThetaKind::Two, t)?;
    let th3 = jacobi_theta(ThetaKind::Three, t)?;
    let th4 = jacobi_theta(ThetaKind::Four, t)?;
    let e4 = eisenstein_e4(t)?;
    let tol = DEFAULT_TAIL_TOLERANCE;
    let z1 = lattice_theta(&zn(1)?, t, tol, options)?;
    let z8 = lattice_theta(&zn(8)?, t, tol, options)?;
    let e8v = lattice_theta(&e8(), t, tol, options)?;
    let e8z4 = lattice_theta(&e8_plus_zn(12)?, t, tol, options)?;

    let (a2, a3, a4) = (th2.precise(), th3.precise(), th4.precise());
    let (p2, p3, p4) = (a2.powi(4), a3.powi(4), a4.powi(4));
    let gap = p2 * p4;

    let mut identities = BTreeMap::new();
    let glaisher = e4.precise() - (p2.sqr() + p3.sqr() + p4.sqr()).ldexp(-1);
    identities.insert("glaisher".to_string(), glaisher.abs().to_f64());
    identities.insert("abstruse".to_string(), (p3 - p2 - p4).abs().to_f64());
    let gap_residual = (z8.precise() - e8v.precise()) - gap;
    identities.insert("z8_minus_e8_gap".to_string(), gap_residual.abs().to_f64());
    identities.insert(
        "e8_equals_e4".to_string(),
        (e8v.precise() - e4.precise()).abs().to_f64(),
    );
    let product = e8v.precise() * z1.precise().powi(4);
    identities.insert(
        "multiplicativity".to_string(),
        (e8z4.precise() - product).abs().to_f64(),
    );
    identities.insert(POSITIVITY_MARGIN.to_string(), gap.to_f64());

    let mut values = BTreeMap::new();
    values.insert("theta2".to_string(), th2);
    values.insert("theta3".to_string(), th3);
    values.insert("theta4".to_string(), th4);
    values.insert("e4".to_string(), e4);
    values.insert("theta_z1".to_string(), z1);
    values.insert("theta_z8".to_string(), z8);
    values.insert("theta_e8".to_string(), e8v);
    values.insert("theta_e8_z4".to_string(), e8z4);
    let gap_error =
        4.0 * gap.to_f64() * (th2.abs_error() / a2.to_f64() + th4.abs_error() / a4.to_f64());
    values.insert("gap".to_string(), ThetaValue::new(gap, gap_error, t));
    Ok(IdentityReport {
        t,
        identities,
        values,
    })
}

fn require_self_dual(lattice: &Lattice) -> Result<()> {
    if lattice.is_integral() && lattice.is_unimodular() {
        Ok(())
    } else {
        Err(Error::NotSelfDual(lattice.label()))
    }
}

/// `|Theta(t) - (pi/t)^{n/2} Theta(pi^2/t)|` for a self-dual lattice.
pub fn functional_equation_residual(lattice: &Lattice, t: f64) -> Result<f64> {
    functional_equation_residual_with(lattice, t, EnumerationOptions::default())
}

pub fn functional_equation_residual_with(
    lattice: &Lattice,
    t: f64,
    options: EnumerationOptions,
) -> Result<f64> {
    check_t(t)?;
    require_self_dual(lattice)?;
    let td = Dd::from_f64(t);
    let dual_t = Dd::PI.sqr() / td;
    let left = lattice_theta(lattice, t, DEFAULT_TAIL_TOLERANCE, options)?;
    let dual_norm = required_max_norm(lattice.dim(), dual_t.to_f64(), DEFAULT_TAIL_TOLERANCE)?;
    let right = shell_sum(&enumerate_shells_with(lattice, dual_norm, options)?, dual_t);
    let factor = (Dd::PI / td).pow_half(lattice.dim() as u32);
    Ok((left.precise() - factor * right).abs().to_f64())
}

/// `Xi_L(y) = Theta_{Z^n}(pi y) / Theta_L(pi y)`.
pub fn secrecy_function(lattice: &Lattice, y: f64) -> Result<f64> {
    secrecy_function_with(lattice, y, EnumerationOptions::default())
}

pub fn secrecy_function_with(
    lattice: &Lattice,
    y: f64,
    options: EnumerationOptions,
) -> Result<f64> {
    check_t(y)?;
    require_self_dual(lattice)?;
    let t = (Dd::PI * y).to_f64();
    let reference = lattice_theta(&zn(lattice.dim())?, t, DEFAULT_TAIL_TOLERANCE, options)?;
    let value = lattice_theta(lattice, t, DEFAULT_TAIL_TOLERANCE, options)?;
    Ok((reference.precise() / value.precise()).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{dn, enumerate_shells};

    #[test]
    fn sigma3_small_values() {
        let expected = [1, 9, 28, 73, 126, 252, 344, 585, 757, 1134];
        for (m, &s) in expected.iter().enumerate() {
            assert_eq!(sigma3(m as u64 + 1), s);
        }
    }

    #[test]
    fn e4_leading_coefficients() {
        let s = QSeries::eisenstein_e4(1.0).unwrap();
        assert_eq!(s.coeffs[1], (Ratio::from_integer(2), 240.0));
        assert_eq!(s.coeffs[2], (Ratio::from_integer(4), 2160.0));
    }

    #[test]
    fn theta3_large_t_is_dominated_by_first_terms() {
        let v = jacobi_theta(ThetaKind::Three, 20.0).unwrap();
        assert!((v.value() - (1.0 + 2.0 * (-20.0f64).exp())).abs() <= 1e-8);
    }

    #[test]
    fn theta4_series_matches_product() {
        for t in [0.3, 1.0, 3.0] {
            let series = jacobi_theta(ThetaKind::Four, t).unwrap();
            let product = theta4_product(t).unwrap();
            assert!(
                (series.precise() - product.precise()).abs().to_f64() <= 1e-12,
                "t={t}"
            );
        }
    }

    #[test]
    fn symmetry_point_values() {
        let pi = std::f64::consts::PI;
        let th2 = jacobi_theta(ThetaKind::Two, pi).unwrap();
        let th4 = jacobi_theta(ThetaKind::Four, pi).unwrap();
        assert!((th2.value() - th4.value()).abs() <= 1e-10);
        let th3 = jacobi_theta(ThetaKind::Three, pi).unwrap();
        let e4 = eisenstein_e4(pi).unwrap();
        assert!((e4.value() - 0.75 * th3.value().powi(8)).abs() <= 1e-10);
    }

    #[test]
    fn shells_agree_with_closed_forms() {
        let z1 = enumerate_shells(&zn(1).unwrap(), 400).unwrap();
        let from_shells = theta_from_shells(&z1, 1.0, 1e-16).unwrap();
        let closed = jacobi_theta(ThetaKind::Three, 1.0).unwrap();
        assert!(
            (from_shells.value() - closed.value()).abs()
                <= from_shells.abs_error() + closed.abs_error() + 1e-15
        );
        let e = enumerate_shells(&e8(), 200).unwrap();
        let value = theta_from_shells(&e, 1.0, 1e-16).unwrap();
        assert!((value.value() - eisenstein_e4(1.0).unwrap().value()).abs() <= 1e-10);
    }

    #[test]
    fn large_t_tends_to_one() {
        let e = enumerate_shells(&e8(), 10).unwrap();
        let v = theta_from_shells(&e, 50.0, 1e-16).unwrap();
        assert!((v.value() - 1.0).abs() < 1e-20);
    }

    #[test]
    fn insufficient_shells_are_reported() {
        let e = enumerate_shells(&e8(), 4).unwrap();
        let err = theta_from_shells(&e, 1.0, 1e-16).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientShells { available: 4, .. }
        ));
    }

    #[test]
    fn tail_bound_is_monotone_and_sound_for_z1() {
        let mut last = f64::INFINITY;
        for m in [5, 10, 20, 40] {
            let b = shell_tail_bound(1, 1.0, m);
            assert!(b < last);
            last = b;
            let exact: f64 = ((m + 1)..200)
                .filter(|j| (*j as f64).sqrt().fract() == 0.0)
                .map(|j| 2.0 * (-(j as f64)).exp())
                .sum();
            assert!(exact <= b);
        }
    }

    #[test]
    fn identity_suite_at_one() {
        let report = identity_suite(1.0).unwrap();
        assert!(report.max_residual() <= 1e-12, "{report:?}");
        assert!(report.positivity_margin() > 0.0);
    }

    #[test]
    fn functional_equation_fixed_point() {
        let r = functional_equation_residual(&zn(4).unwrap(), std::f64::consts::PI).unwrap();
        assert!(r <= 1e-10);
        let r = functional_equation_residual(&e8(), 1.0).unwrap();
        assert!(r <= 1e-10);
        assert!(matches!(
            functional_equation_residual(&dn(8).unwrap(), 1.0),
            Err(Error::NotSelfDual(_))
        ));
    }

    #[test]
    fn secrecy_values() {
        assert_eq!(secrecy_function(&zn(8).unwrap(), 0.7).unwrap(), 1.0);
        let xi = secrecy_function(&e8(), 1.0).unwrap();
        assert!((xi - 4.0 / 3.0).abs() <= 1e-10);
        assert!(secrecy_function(&e8(), 3.0).unwrap() > 1.0);
        assert!(secrecy_function(&e8(), 0.0).is_err());
    }

    #[test]
    fn invalid_arguments() {
        assert!(jacobi_theta(ThetaKind::Three, 0.0).is_err());
        assert!(eisenstein_e4(-1.0).is_err());
        assert!(ThetaKind::from_index(5).is_err());
    }
}
