//! Radial Gaussian combinations `h(x) = sum c_k e^{-a_k |x|^2}` and
//! Poisson summation over self-dual lattices.
//!
//! The Fourier transform is normalised as `f^(xi) = int f(x) e^{-2 pi i <x, xi>} dx`,
//! so a single term maps to `(pi/a)^{n/2} e^{-pi^2 |xi|^2 / a}`.

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::lattice::{enumerate_shells_with, EnumerationOptions, Lattice, ShellSeries};
use crate::theta::shell_tail_bound;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub c: f64,
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianComboJson", into = "GaussianComboJson")]
pub struct GaussianCombo {
    dim: usize,
    terms: Vec<GaussianTerm>,
}

#[derive(Serialize, Deserialize)]
struct GaussianComboJson {
    dim: usize,
    terms: Vec<GaussianTerm>,
}

impl TryFrom<GaussianComboJson> for GaussianCombo {
    type Error = Error;
    fn try_from(json: GaussianComboJson) -> Result<GaussianCombo> {
        GaussianCombo::new(json.dim, json.terms)
    }
}

impl From<GaussianCombo> for GaussianComboJson {
    fn from(h: GaussianCombo) -> GaussianComboJson {
        GaussianComboJson {
            dim: h.dim,
            terms: h.terms,
        }
    }
}

impl GaussianCombo {
    pub fn new(dim: usize, terms: Vec<GaussianTerm>) -> Result<GaussianCombo> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        for term in &terms {
            if !(term.a.is_finite() && term.a > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "Gaussian widths must be positive, got {}",
                    term.a
                )));
            }
            if !term.c.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "Gaussian coefficients must be finite, got {}",
                    term.c
                )));
            }
        }
        Ok(GaussianCombo { dim, terms })
    }

    /// The single Gaussian `e^{-t |x|^2}`.
    pub fn gaussian(dim: usize, t: f64) -> Result<GaussianCombo> {
        GaussianCombo::new(dim, vec![GaussianTerm { c: 1.0, a: t }])
    }

    pub fn from_pairs(dim: usize, pairs: &[(f64, f64)]) -> Result<GaussianCombo> {
        GaussianCombo::new(
            dim,
            pairs.iter().map(|&(c, a)| GaussianTerm { c, a }).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    /// `h` at a point of squared norm `r2`.
    pub fn eval(&self, r2: f64) -> f64 {
        self.eval_dd(Dd::from_f64(r2)).to_f64()
    }

    pub fn eval_dd(&self, r2: Dd) -> Dd {
        self.terms
            .iter()
            .map(|term| (-(r2 * term.a)).exp() * term.c)
            .sum()
    }

    /// `h^` at a frequency of squared norm `r2`, from the exact term map.
    pub fn fourier_eval_dd(&self, r2: Dd) -> Dd {
        self.terms
            .iter()
            .map(|term| {
                let (coeff, width) = fourier_term(self.dim, term);
                (-(r2 * width)).exp() * coeff
            })
            .sum()
    }

    pub fn fourier_eval(&self, r2: f64) -> f64 {
        self.fourier_eval_dd(Dd::from_f64(r2)).to_f64()
    }

    /// Termwise `(c, a) -> (c (pi/a)^{n/2}, pi^2/a)`, rounded to `f64`.
    pub fn fourier(&self) -> GaussianCombo {
        let terms = self
            .terms
            .iter()
            .map(|term| {
                let (c, a) = fourier_term(self.dim, term);
                GaussianTerm {
                    c: c.to_f64(),
                    a: a.to_f64(),
                }
            })
            .collect();
        GaussianCombo {
            dim: self.dim,
            terms,
        }
    }

    /// `sum_k |c_k| * tail(a_k)` for the direct side and the transform.
    pub fn lattice_tail_bound(&self, max_norm: u64) -> f64 {
        let side = |h: &GaussianCombo| -> f64 {
            h.terms
                .iter()
                .map(|term| term.c.abs() * shell_tail_bound(h.dim, term.a, max_norm))
                .sum()
        };
        side(self) + side(&self.fourier())
    }

    /// Smallest `M` whose two-sided tail is below `tol / 10`.
    pub fn required_max_norm(&self, tol: f64) -> Result<u64> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let target = tol / 10.0;
        let mut hi = 1u64;
        while self.lattice_tail_bound(hi) > target {
            hi *= 2;
            if hi > 1 << 32 {
                return Err(Error::InvalidParameter(
                    "Gaussian combination needs an unbounded truncation".into(),
                ));
            }
        }
        let mut lo = 0;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.lattice_tail_bound(mid) <= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }
}

/// `(c (pi/a)^{n/2}, pi^2/a)` in double-double.
pub fn fourier_term(dim: usize, term: &GaussianTerm) -> (Dd, Dd) {
    let a = Dd::from_f64(term.a);
    ((Dd::PI / a).pow_half(dim as u32) * term.c, Dd::PI.sqr() / a)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tail_bound: f64,
    pub max_norm: u64,
    pub tolerance: f64,
    pub passed: bool,
}

fn require_self_dual(lattice: &Lattice) -> Result<()> {
    if lattice.is_integral() && lattice.is_unimodular() {
        Ok(())
    } else {
        Err(Error::NotSelfDual(lattice.label()))
    }
}

/// Compares `sum_x h(x)` with `sum_xi h^(xi)` using shell data that `shells`
/// already holds.
pub fn poisson_check_with_shells(
    h: &GaussianCombo,
    lattice: &Lattice,
    shells: &ShellSeries,
    tol: f64,
) -> Result<PoissonReport> {
    require_self_dual(lattice)?;
    if h.dim() != lattice.dim() {
        return Err(Error::InvalidParameter(format!(
            "function of dimension {} on lattice of dimension {}",
            h.dim(),
            lattice.dim()
        )));
    }
    let required = h.required_max_norm(tol)?;
    if required > shells.max_norm() {
        return Err(Error::InsufficientShells {
            available: shells.max_norm(),
            required,
        });
    }
    let mut lhs = Dd::ZERO;
    let mut rhs = Dd::ZERO;
    for (m, &count) in shells.counts().iter().enumerate() {
        if count == 0 {
            continue;
        }
        let r2 = Dd::from_u64(m as u64);
        let weight = Dd::from_u64(count);
        lhs += h.eval_dd(r2) * weight;
        rhs += h.fourier_eval_dd(r2) * weight;
    }
    let tail_bound = h.lattice_tail_bound(shells.max_norm());
    let residual = (lhs - rhs).abs().to_f64();
    Ok(PoissonReport {
        lhs: lhs.to_f64(),
        rhs: rhs.to_f64(),
        residual,
        tail_bound,
        max_norm: shells.max_norm(),
        tolerance: tol,
        passed: residual <= tol + tail_bound,
    })
}

/// Enumerates the shells the tail policy needs, then checks.
pub fn poisson_check(
    h: &GaussianCombo,
    lattice: &Lattice,
    tol: f64,
    options: EnumerationOptions,
) -> Result<PoissonReport> {
    require_self_dual(lattice)?;
    let max_norm = h.required_max_norm(tol)?;
    let shells = enumerate_shells_with(lattice, max_norm, options)?;
    poisson_check_with_shells(h, lattice, &shells, tol)
}

/// Evidence that the plain Gaussian is not a certificate: it meets the
/// majorant condition with equality and its transform is positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonCertificateReport {
    pub dim: usize,
    pub t: f64,
    pub max_norm: u64,
    /// `max_m |h(m) - e^{-t m}|`.
    pub majorant_residual: f64,
    /// `(m, h^(m))` for `m = 1..=M`.
    pub fourier_values: Vec<(u64, f64)>,
    /// `(m, ln h^(m))`, finite even where `h^(m)` underflows.
    pub fourier_log_values: Vec<(u64, f64)>,
    /// Smallest `h^(m)`; positive means condition (ii) fails at every shell.
    pub min_violation_margin: f64,
    pub violated_everywhere: bool,
}

pub fn gaussian_noncert_report(dim: usize, t: f64, max_norm: u64) -> Result<NonCertificateReport> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t must be positive, got {t}"
        )));
    }
    let h = GaussianCombo::gaussian(dim, t)?;
    let (coeff, width) = fourier_term(dim, &h.terms[0]);
    let mut majorant_residual: f64 = 0.0;
    let mut fourier_values = Vec::new();
    let mut fourier_log_values = Vec::new();
    for m in 1..=max_norm {
        let r2 = Dd::from_u64(m);
        let target = (-(r2 * t)).exp();
        majorant_residual = majorant_residual.max((h.eval_dd(r2) - target).abs().to_f64());
        fourier_values.push((m, h.fourier_eval_dd(r2).to_f64()));
        let log = coeff.to_f64().ln() - (width * m as f64).to_f64();
        fourier_log_values.push((m, log));
    }
    let min_violation_margin = fourier_values
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    // The transform is a positive multiple of a Gaussian, so its sign is
    // that of the coefficient on every shell.
    let violated_everywhere = coeff.to_f64() > 0.0;
    Ok(NonCertificateReport {
        dim,
        t,
        max_norm,
        majorant_residual,
        fourier_values,
        fourier_log_values,
        min_violation_margin,
        violated_everywhere,
    })
}
