//! Executable audits of the saturation argument.
//!
//! * [`chain_audit`] evaluates the seven-line chain
//!   `Theta_L - 1 <= sum' h = sum h - h(0) = sum h^ - h(0) = h^(0) - h(0) + sum' h^
//!   <= h^(0) - h(0) = Theta_{Z^n} - 1` on a self-dual lattice and splits the
//!   two slacks into per-shell contributions `A_m` and `B_m`.
//! * [`e8_collapse_audit`] runs the collapse computation on `E8 + Z^{n-8}` and
//!   reports which step breaks and by how much.
//! * [`graded_audit`] checks the sign conditions and the Poisson comparison
//!   for the difference `F = h_lc - h_zn` of a graded pair.
//! * [`sequence_audit`] tracks `eps_j` and the per-shell bounds along a
//!   sequence and, given summable envelopes, the limit clash between
//!   `Theta_{Lambda_c}` and `Theta_{Z^n}`.
//!
//! All sums are taken over shells weighted by the exact counts `r(m)` and
//! accumulated in double-double arithmetic; every report records the tail
//! bound beyond its truncation norm.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::lattice::{
    e8_plus_zn, enumerate_shells_with, zn, EnumerationOptions, Lattice, RotatedLattice,
    RotationMatrix, ShellSeries,
};
use crate::poisson::GaussianCombo;
use crate::theta::{jacobi_theta, required_max_norm, shell_tail_bound, ThetaKind};

pub const CHAIN_TOLERANCE: f64 = 1e-8;
pub const SIGN_TOLERANCE: f64 = 1e-10;
pub const TAIL_TOLERANCE: f64 = 1e-12;
/// Largest squared norm whose shells are evaluated point by point under a
/// rotation.
pub const DEFAULT_ROTATION_CHECK_NORM: u64 = 2;
/// Allowed change of any per-shell sum under a rotation.
pub const RADIAL_INVARIANCE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditOptions {
    pub chain_tol: f64,
    pub sign_tol: f64,
    pub tail_tol: f64,
    pub enumeration: EnumerationOptions,
    pub allow_test_doubles: bool,
    pub rotation_check_norm: u64,
    /// Fixed truncation norm; the audit fails if it leaves too large a tail.
    pub max_norm: Option<u64>,
}

impl Default for AuditOptions {
    fn default() -> AuditOptions {
        AuditOptions {
            chain_tol: CHAIN_TOLERANCE,
            sign_tol: SIGN_TOLERANCE,
            tail_tol: TAIL_TOLERANCE,
            enumeration: EnumerationOptions::default(),
            allow_test_doubles: false,
            rotation_check_norm: DEFAULT_ROTATION_CHECK_NORM,
            max_norm: None,
        }
    }
}

/// Shell values prescribed directly instead of through a function.
///
/// `h` and `h^` on a point of squared norm `r2` are `h_shells(r2)` and
/// `hat_shells(r2)`; the two profiles are independent, so Poisson summation
/// generally fails for them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrescribedShells {
    pub h_zero: f64,
    pub hat_zero: f64,
    pub h_shells: GaussianCombo,
    pub hat_shells: GaussianCombo,
}

impl PrescribedShells {
    pub fn new(
        h_zero: f64,
        hat_zero: f64,
        h_shells: GaussianCombo,
        hat_shells: GaussianCombo,
    ) -> Result<PrescribedShells> {
        if h_shells.dim() != hat_shells.dim() {
            return Err(Error::InvalidParameter(format!(
                "shell profiles of dimensions {} and {}",
                h_shells.dim(),
                hat_shells.dim()
            )));
        }
        if !(h_zero.is_finite() && hat_zero.is_finite()) {
            return Err(Error::InvalidParameter(
                "values at the origin must be finite".into(),
            ));
        }
        Ok(PrescribedShells {
            h_zero,
            hat_zero,
            h_shells,
            hat_shells,
        })
    }

    /// `h = e^{-t |x|^2}` and `h^ = 0` on every nonzero shell, normalised so
    /// that `1 + h^(0) - h(0) = theta_zn`.
    pub fn saturated(dim: usize, t: f64, theta_zn: f64) -> Result<PrescribedShells> {
        PrescribedShells::new(
            1.0,
            theta_zn,
            GaussianCombo::gaussian(dim, t)?,
            GaussianCombo::new(dim, Vec::new())?,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditFunction {
    Combo(GaussianCombo),
    TestDouble(PrescribedShells),
}

impl From<GaussianCombo> for AuditFunction {
    fn from(h: GaussianCombo) -> AuditFunction {
        AuditFunction::Combo(h)
    }
}

fn side_tail(h: &GaussianCombo, max_norm: u64) -> f64 {
    h.terms()
        .iter()
        .map(|term| term.c.abs() * shell_tail_bound(h.dim(), term.a, max_norm))
        .sum()
}

impl AuditFunction {
    pub fn dim(&self) -> usize {
        match self {
            AuditFunction::Combo(h) => h.dim(),
            AuditFunction::TestDouble(p) => p.h_shells.dim(),
        }
    }

    pub fn is_test_double(&self) -> bool {
        matches!(self, AuditFunction::TestDouble(_))
    }

    fn h_at(&self, r2: Dd) -> Dd {
        match self {
            AuditFunction::Combo(h) => h.eval_dd(r2),
            AuditFunction::TestDouble(p) => p.h_shells.eval_dd(r2),
        }
    }

    fn hat_at(&self, r2: Dd) -> Dd {
        match self {
            AuditFunction::Combo(h) => h.fourier_eval_dd(r2),
            AuditFunction::TestDouble(p) => p.hat_shells.eval_dd(r2),
        }
    }

    fn h_zero(&self) -> Dd {
        match self {
            AuditFunction::Combo(h) => h.eval_dd(Dd::ZERO),
            AuditFunction::TestDouble(p) => Dd::from_f64(p.h_zero),
        }
    }

    fn hat_zero(&self) -> Dd {
        match self {
            AuditFunction::Combo(h) => h.fourier_eval_dd(Dd::ZERO),
            AuditFunction::TestDouble(p) => Dd::from_f64(p.hat_zero),
        }
    }

    /// Bound on the two sums beyond `max_norm`, direct side plus transform.
    pub fn tail(&self, max_norm: u64) -> f64 {
        match self {
            AuditFunction::Combo(h) => h.lattice_tail_bound(max_norm),
            AuditFunction::TestDouble(p) => {
                side_tail(&p.h_shells, max_norm) + side_tail(&p.hat_shells, max_norm)
            }
        }
    }

    fn admit(&self, options: &AuditOptions) -> Result<()> {
        if self.is_test_double() && !options.allow_test_doubles {
            Err(Error::TestDoubleRejected)
        } else {
            Ok(())
        }
    }
}

/// Smallest `M` with `tail(M) <= target`, for a nonincreasing `tail`.
fn smallest_norm(tail: impl Fn(u64) -> f64, target: f64) -> Result<u64> {
    let mut hi = 1u64;
    while tail(hi) > target {
        hi *= 2;
        if hi > 1 << 32 {
            return Err(Error::InvalidParameter(
                "no finite truncation meets the tail tolerance".into(),
            ));
        }
    }
    let mut lo = 0;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if tail(mid) <= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "t must be positive, got {t}"
        )))
    }
}

/// Truncation norm for a set of functions on a `dim`-dimensional lattice.
fn truncation(dim: usize, t: f64, fs: &[&AuditFunction], options: &AuditOptions) -> Result<u64> {
    let target = options.tail_tol / 10.0;
    let mut required = required_max_norm(dim, t, target)?.max(1);
    for f in fs {
        required = required.max(smallest_norm(|m| f.tail(m), target)?);
    }
    match options.max_norm {
        Some(configured) if configured < required => Err(Error::InsufficientShells {
            available: configured,
            required,
        }),
        Some(configured) => Ok(configured),
        None => Ok(required),
    }
}

fn require_self_dual(lattice: &Lattice) -> Result<()> {
    if lattice.is_integral() && lattice.is_unimodular() {
        Ok(())
    } else {
        Err(Error::NotSelfDual(lattice.label()))
    }
}

fn theta3_power(t: f64, n: usize) -> Result<Dd> {
    Ok(jacobi_theta(ThetaKind::Three, t)?.precise().powi(n as i32))
}

/// `theta_2^4 theta_4^4`, which equals `Theta_{Z^8} - Theta_{E8}`.
fn e8_gap(t: f64) -> Result<Dd> {
    let th2 = jacobi_theta(ThetaKind::Two, t)?.precise();
    let th4 = jacobi_theta(ThetaKind::Four, t)?.precise();
    Ok(th2.powi(4) * th4.powi(4))
}

/// Per-shell sums of `e^{-t r2}`, `h` and `h^`.
#[derive(Clone, Copy)]
struct ShellTerms {
    m: u64,
    count: u64,
    gauss: Dd,
    h: Dd,
    hat: Dd,
}

fn exact_shell_terms(f: &AuditFunction, shells: &ShellSeries, t: f64) -> Vec<ShellTerms> {
    shells
        .nonzero_shells()
        .filter(|&(m, _)| m > 0)
        .map(|(m, count)| {
            let r2 = Dd::from_u64(m);
            let weight = Dd::from_u64(count);
            ShellTerms {
                m,
                count,
                gauss: (-(r2 * t)).exp() * weight,
                h: f.h_at(r2) * weight,
                hat: f.hat_at(r2) * weight,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `h(x) >= e^{-t |x|^2}` on nonzero points.
    Majorant,
    /// `h^(x) <= 0` on nonzero points.
    Fourier,
    /// `h(x) - e^{-t |x|^2} <= eps`.
    MajorantUpper,
    /// `-h^(x) <= eps`.
    FourierUpper,
    /// `1 + h^(0) - h(0) >= Theta_{Z^n}(t)`.
    WeakBound,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Condition::Majorant => "condition (i): h >= Gaussian",
            Condition::Fourier => "condition (ii): h^ <= 0",
            Condition::MajorantUpper => "h - Gaussian <= eps",
            Condition::FourierUpper => "-h^ <= eps",
            Condition::WeakBound => "1 + h^(0) - h(0) >= Theta_Zn",
        };
        f.write_str(text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Sharp,
    NearSharp { epsilon: f64 },
    Violated { condition: Condition, shell: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: Condition,
    pub shell: u64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainLine {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    LessEq,
    Equal,
    /// The final equality, which holds only for a sharp function.
    Sharpness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub from: String,
    pub to: String,
    pub relation: Relation,
    /// `to - from`.
    pub difference: f64,
    pub holds: bool,
    /// Set when the relation holds with room to spare (inequalities) or
    /// fails (equalities).
    pub strict: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellAudit {
    pub m: u64,
    pub count: u64,
    /// `h(sqrt m) - e^{-t m}` per point.
    pub h_slack: f64,
    /// `-h^(sqrt m)` per point.
    pub hat_slack: f64,
    /// `r(m) (h(sqrt m) - e^{-t m})`.
    pub a: f64,
    /// `-r(m) h^(sqrt m)`.
    pub b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tails {
    pub max_norm: u64,
    pub theta: f64,
    pub function: f64,
    pub total: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub chain: f64,
    pub sign: f64,
    pub tail: f64,
}

impl From<&AuditOptions> for Tolerances {
    fn from(options: &AuditOptions) -> Tolerances {
        Tolerances {
            chain: options.chain_tol,
            sign: options.sign_tol,
            tail: options.tail_tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationCheck {
    pub seed: u64,
    pub orthogonality_defect: f64,
    pub checked_max_norm: u64,
    pub points_checked: u64,
    /// `max |‖Ux‖^2 - m|` over the rotated points.
    pub max_norm_deviation: f64,
    /// Largest change of a per-shell sum of `e^{-t r2}`, `h` or `h^`.
    pub max_value_deviation: f64,
    pub invariant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    pub lattice_label: String,
    pub t: f64,
    pub dim: usize,
    pub test_double: bool,
    /// `1 + h^(0) - h(0) - Theta_{Z^n}(t)`.
    pub epsilon: f64,
    /// `1 + h^(0) - h(0) - Theta_L(t)`.
    pub lattice_epsilon: f64,
    /// `1 + h^(0) - h(0)`.
    pub objective: f64,
    pub theta_lattice: f64,
    pub theta_zn: f64,
    pub chain_values: Vec<ChainLine>,
    pub steps: Vec<ChainStep>,
    pub per_shell: Vec<ShellAudit>,
    pub sum_a: f64,
    pub sum_b: f64,
    /// `|sum A + sum B - lattice_epsilon|`.
    pub bookkeeping_residual: f64,
    pub bookkeeping_holds: bool,
    pub tails: Tails,
    pub tolerances: Tolerances,
    pub per_point_bounds_hold: bool,
    pub verdict: Verdict,
    /// Sign violations of conditions (i) and (ii), by ascending shell.
    pub violations: Vec<Violation>,
    /// Failures of the per-point bounds `<= eps + tol`.
    pub bound_violations: Vec<Violation>,
    pub rotation: Option<RotationCheck>,
    pub cross_checks: BTreeMap<String, f64>,
}

impl SaturationReport {
    pub fn is_violated(&self) -> bool {
        matches!(self.verdict, Verdict::Violated { .. })
    }

    pub fn chain_value(&self, label: &str) -> Option<f64> {
        self.chain_values
            .iter()
            .find(|line| line.label == label)
            .map(|line| line.value)
    }

    /// Largest absolute difference between two reports' numeric content.
    pub fn max_deviation(&self, other: &SaturationReport) -> f64 {
        let mut worst: f64 = 0.0;
        let mut see = |a: f64, b: f64| worst = worst.max((a - b).abs());
        see(self.epsilon, other.epsilon);
        see(self.lattice_epsilon, other.lattice_epsilon);
        see(self.objective, other.objective);
        see(self.sum_a, other.sum_a);
        see(self.sum_b, other.sum_b);
        see(self.bookkeeping_residual, other.bookkeeping_residual);
        for (x, y) in self.chain_values.iter().zip(&other.chain_values) {
            see(x.value, y.value);
        }
        for (x, y) in self.per_shell.iter().zip(&other.per_shell) {
            see(x.a, y.a);
            see(x.b, y.b);
            see(x.h_slack, y.h_slack);
            see(x.hat_slack, y.hat_slack);
        }
        if self.chain_values.len() != other.chain_values.len()
            || self.per_shell.len() != other.per_shell.len()
            || self.verdict_kind() != other.verdict_kind()
        {
            return f64::INFINITY;
        }
        worst
    }

    fn verdict_kind(&self) -> u8 {
        match self.verdict {
            Verdict::Sharp => 0,
            Verdict::NearSharp { .. } => 1,
            Verdict::Violated { .. } => 2,
        }
    }
}

pub const CHAIN_LABELS: [&str; 7] = [
    "theta_lattice_minus_one",
    "sum_h_nonzero",
    "sum_h_minus_h0",
    "sum_hat_minus_h0",
    "hat0_minus_h0_plus_sum_hat_nonzero",
    "hat0_minus_h0",
    "theta_zn_minus_one",
];

/// Replaces the small shells by sums over rotated points.
fn rotated_shell_terms(
    f: &AuditFunction,
    lattice: &Lattice,
    rotation: &RotationMatrix,
    t: f64,
    terms: &mut [ShellTerms],
    options: &AuditOptions,
) -> Result<RotationCheck> {
    let rotated = RotatedLattice::new(lattice.clone(), rotation.clone())?;
    let max_checked = options.rotation_check_norm;
    let points = rotated.vectors(max_checked, options.enumeration.budget)?;
    let mut by_shell: BTreeMap<u64, Vec<Dd>> = BTreeMap::new();
    let mut max_norm_deviation: f64 = 0.0;
    let mut points_checked = 0u64;
    for (x, m) in &points {
        if *m == 0 {
            continue;
        }
        let r2: Dd = x.iter().map(|&v| Dd::from_f64(v).sqr()).sum();
        max_norm_deviation = max_norm_deviation.max((r2 - Dd::from_u64(*m)).abs().to_f64());
        by_shell.entry(*m).or_default().push(r2);
        points_checked += 1;
    }
    let mut max_value_deviation: f64 = 0.0;
    for term in terms.iter_mut().filter(|term| term.m <= max_checked) {
        let norms = by_shell.get(&term.m).map(Vec::as_slice).unwrap_or(&[]);
        if norms.len() as u64 != term.count {
            return Err(Error::InvalidParameter(format!(
                "rotated shell {} has {} points, expected {}",
                term.m,
                norms.len(),
                term.count
            )));
        }
        let gauss: Dd = norms.iter().map(|&r2| (-(r2 * t)).exp()).sum();
        let h: Dd = norms.iter().map(|&r2| f.h_at(r2)).sum();
        let hat: Dd = norms.iter().map(|&r2| f.hat_at(r2)).sum();
        for (new, old) in [(gauss, term.gauss), (h, term.h), (hat, term.hat)] {
            max_value_deviation = max_value_deviation.max((new - old).abs().to_f64());
        }
        term.gauss = gauss;
        term.h = h;
        term.hat = hat;
    }
    Ok(RotationCheck {
        seed: rotation.seed,
        orthogonality_defect: rotation.orthogonality_defect(),
        checked_max_norm: max_checked,
        points_checked,
        max_norm_deviation,
        max_value_deviation,
        invariant: max_value_deviation <= RADIAL_INVARIANCE_TOLERANCE,
    })
}

/// The chain on already enumerated shells; `rotation` carries the
/// point-level terms and their check.
#[allow(clippy::too_many_arguments)]
fn chain_from_terms(
    f: &AuditFunction,
    label: String,
    dim: usize,
    t: f64,
    max_norm: u64,
    terms: &[ShellTerms],
    rotation: Option<RotationCheck>,
    options: &AuditOptions,
) -> Result<SaturationReport> {
    let theta_zn = theta3_power(t, dim)?;
    let h0 = f.h_zero();
    let hat0 = f.hat_zero();
    let gauss_total: Dd = terms.iter().map(|s| s.gauss).sum();
    let h_total: Dd = terms.iter().map(|s| s.h).sum();
    let hat_total: Dd = terms.iter().map(|s| s.hat).sum();
    let sum_a: Dd = terms.iter().map(|s| s.h - s.gauss).sum();
    let sum_b: Dd = terms.iter().map(|s| -s.hat).sum();

    let lines = [
        gauss_total,
        h_total,
        (h0 + h_total) - h0,
        (hat0 + hat_total) - h0,
        hat0 - h0 + hat_total,
        hat0 - h0,
        theta_zn - Dd::ONE,
    ];
    let chain_values = CHAIN_LABELS
        .iter()
        .zip(&lines)
        .map(|(label, value)| ChainLine {
            label: label.to_string(),
            value: value.to_f64(),
        })
        .collect();

    let tails = Tails {
        max_norm,
        theta: shell_tail_bound(dim, t, max_norm),
        function: f.tail(max_norm),
        total: 0.0,
    };
    let tails = Tails {
        total: tails.theta + tails.function,
        ..tails
    };
    let slack = options.chain_tol + tails.total;
    let relations = [
        Relation::LessEq,
        Relation::Equal,
        Relation::Equal,
        Relation::Equal,
        Relation::LessEq,
        Relation::Sharpness,
    ];
    let steps = relations
        .iter()
        .enumerate()
        .map(|(i, &relation)| {
            let difference = (lines[i + 1] - lines[i]).to_f64();
            let (holds, strict) = match relation {
                Relation::LessEq => (
                    difference >= -(options.sign_tol + tails.total),
                    difference > slack,
                ),
                Relation::Equal | Relation::Sharpness => {
                    let holds = difference.abs() <= slack;
                    (holds, !holds)
                }
            };
            ChainStep {
                from: CHAIN_LABELS[i].to_string(),
                to: CHAIN_LABELS[i + 1].to_string(),
                relation,
                difference,
                holds,
                strict,
            }
        })
        .collect();

    let objective = Dd::ONE + hat0 - h0;
    let theta_lattice = Dd::ONE + gauss_total;
    let epsilon = (objective - theta_zn).to_f64();
    let lattice_epsilon = objective - theta_lattice;
    let bookkeeping_residual = (sum_a + sum_b - lattice_epsilon).abs().to_f64();

    let mut per_shell = Vec::with_capacity(terms.len());
    let mut violations = Vec::new();
    let mut bound_violations = Vec::new();
    for s in terms {
        let a = (s.h - s.gauss).to_f64();
        let b = (-s.hat).to_f64();
        let weight = s.count as f64;
        let h_slack = a / weight;
        let hat_slack = b / weight;
        if a < -options.sign_tol {
            violations.push(Violation {
                condition: Condition::Majorant,
                shell: s.m,
                value: a,
            });
        }
        if b < -options.sign_tol {
            violations.push(Violation {
                condition: Condition::Fourier,
                shell: s.m,
                value: b,
            });
        }
        if h_slack > epsilon + options.chain_tol {
            bound_violations.push(Violation {
                condition: Condition::MajorantUpper,
                shell: s.m,
                value: h_slack,
            });
        }
        if hat_slack > epsilon + options.chain_tol {
            bound_violations.push(Violation {
                condition: Condition::FourierUpper,
                shell: s.m,
                value: hat_slack,
            });
        }
        per_shell.push(ShellAudit {
            m: s.m,
            count: s.count,
            h_slack,
            hat_slack,
            a,
            b,
        });
    }
    let verdict = if let Some(first) = violations.first() {
        Verdict::Violated {
            condition: first.condition,
            shell: first.shell,
        }
    } else if epsilon < -slack {
        Verdict::Violated {
            condition: Condition::WeakBound,
            shell: 0,
        }
    } else if epsilon <= slack {
        Verdict::Sharp
    } else {
        Verdict::NearSharp { epsilon }
    };

    Ok(SaturationReport {
        lattice_label: label,
        t,
        dim,
        test_double: f.is_test_double(),
        epsilon,
        lattice_epsilon: lattice_epsilon.to_f64(),
        objective: objective.to_f64(),
        theta_lattice: theta_lattice.to_f64(),
        theta_zn: theta_zn.to_f64(),
        chain_values,
        steps,
        per_shell,
        sum_a: sum_a.to_f64(),
        sum_b: sum_b.to_f64(),
        bookkeeping_residual,
        bookkeeping_holds: bookkeeping_residual <= slack,
        tails,
        tolerances: options.into(),
        per_point_bounds_hold: bound_violations.is_empty(),
        verdict,
        violations,
        bound_violations,
        rotation,
        cross_checks: BTreeMap::new(),
    })
}

fn check_dims(f: &AuditFunction, lattice: &Lattice) -> Result<()> {
    if f.dim() == lattice.dim() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "function of dimension {} on lattice of dimension {}",
            f.dim(),
            lattice.dim()
        )))
    }
}

fn chain_with_shells(
    f: &AuditFunction,
    lattice: &Lattice,
    rotation: Option<&RotationMatrix>,
    t: f64,
    shells: &ShellSeries,
    options: &AuditOptions,
) -> Result<SaturationReport> {
    let mut terms = exact_shell_terms(f, shells, t);
    let (label, check) = match rotation {
        Some(u) => {
            let check = rotated_shell_terms(f, lattice, u, t, &mut terms, options)?;
            (
                format!("U{}[seed={}]", lattice.label(), u.seed),
                Some(check),
            )
        }
        None => (lattice.label(), None),
    };
    chain_from_terms(
        f,
        label,
        lattice.dim(),
        t,
        shells.max_norm(),
        &terms,
        check,
        options,
    )
}

/// Audits the saturation chain of `f` on the self-dual lattice `lattice`,
/// evaluated on `U lattice` when a rotation is given.
pub fn chain_audit(
    f: &AuditFunction,
    lattice: &Lattice,
    rotation: Option<&RotationMatrix>,
    t: f64,
    options: &AuditOptions,
) -> Result<SaturationReport> {
    check_t(t)?;
    f.admit(options)?;
    require_self_dual(lattice)?;
    check_dims(f, lattice)?;
    let max_norm = truncation(lattice.dim(), t, &[f], options)?;
    let shells = enumerate_shells_with(lattice, max_norm, options.enumeration)?;
    chain_with_shells(f, lattice, rotation, t, &shells, options)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseStep {
    pub label: String,
    /// `rhs - lhs` of the step, zero under exact saturation.
    pub residual: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub lattice_label: String,
    pub dim: usize,
    pub t: f64,
    pub test_double: bool,
    pub lines: Vec<ChainLine>,
    pub steps: Vec<CollapseStep>,
    pub first_failing_step: Option<String>,
    /// `sum' (h - e^{-t|x|^2}) - sum' h^` on the collapse lattice: the total
    /// amount by which the two saturation steps fail.
    pub collapse_residual: f64,
    /// `Theta_L - 1 - (h^(0) - h(0) + sum' h^)`.
    pub theta_vs_transform_side: f64,
    pub epsilon: f64,
    pub theta_lattice: f64,
    pub theta_zn: f64,
    /// What exact collapse would force.
    pub forced_identity: String,
    /// `theta_2^4 theta_4^4 = Theta_{Z^8} - Theta_{E8}`.
    pub e8_gap: f64,
    /// `theta_2^4 theta_4^4 theta_3^{n-8} = Theta_{Z^n} - Theta_L`.
    pub contradiction_magnitude: f64,
    /// `|Theta_{Z^n} - Theta_L - contradiction_magnitude|` from shells.
    pub gap_consistency: f64,
    pub tails: Tails,
}

pub const COLLAPSE_STEPS: [&str; 5] = [
    "gaussian_interpolation",
    "split_origin",
    "poisson_summation",
    "fourier_annihilation",
    "sharpness",
];

/// Runs the collapse computation on `E8 + Z^{n-8}`.
pub fn e8_collapse_audit(
    f: &AuditFunction,
    n: usize,
    t: f64,
    options: &AuditOptions,
) -> Result<CollapseReport> {
    if n < 8 {
        return Err(Error::InvalidParameter(format!(
            "the collapse lattice needs n >= 8, got {n}"
        )));
    }
    check_t(t)?;
    f.admit(options)?;
    let lattice = e8_plus_zn(n)?;
    check_dims(f, &lattice)?;
    let chain = chain_audit(f, &lattice, None, t, options)?;
    let line = |i: usize| chain.chain_values[i].value;
    let slack = options.chain_tol + chain.tails.total;
    let residuals = [
        chain.sum_a,
        line(2) - line(1),
        line(3) - line(2),
        -chain.sum_b,
        -chain.epsilon,
    ];
    let steps: Vec<CollapseStep> = COLLAPSE_STEPS
        .iter()
        .zip(residuals)
        .map(|(label, residual)| CollapseStep {
            label: label.to_string(),
            residual,
            holds: residual.abs() <= slack,
        })
        .collect();
    let first_failing_step = steps.iter().find(|s| !s.holds).map(|s| s.label.clone());
    let lines = [0, 1, 2, 3, 5, 6]
        .iter()
        .map(|&i| chain.chain_values[i].clone())
        .collect();
    let gap = e8_gap(t)?;
    let magnitude = gap * theta3_power(t, n - 8)?;
    let theta_difference = chain.theta_zn - chain.theta_lattice;
    Ok(CollapseReport {
        lattice_label: chain.lattice_label.clone(),
        dim: n,
        t,
        test_double: f.is_test_double(),
        lines,
        steps,
        first_failing_step,
        collapse_residual: chain.sum_a + chain.sum_b,
        theta_vs_transform_side: line(0) - line(4),
        epsilon: chain.epsilon,
        theta_lattice: chain.theta_lattice,
        theta_zn: chain.theta_zn,
        forced_identity: "Theta_E8(t) = Theta_Z8(t)".into(),
        e8_gap: gap.to_f64(),
        contradiction_magnitude: magnitude.to_f64(),
        gap_consistency: (theta_difference - magnitude.to_f64()).abs(),
        tails: chain.tails,
    })
}

/// `h_zn` and `h_lc` with `F = h_lc - h_zn` stored as the signed
/// concatenation of their terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedPair {
    h_zn: GaussianCombo,
    h_lc: GaussianCombo,
    f: GaussianCombo,
}

impl GradedPair {
    pub fn new(h_zn: GaussianCombo, h_lc: GaussianCombo) -> Result<GradedPair> {
        if h_zn.dim() != h_lc.dim() {
            return Err(Error::InvalidParameter(format!(
                "graded pair of dimensions {} and {}",
                h_zn.dim(),
                h_lc.dim()
            )));
        }
        let mut terms = h_lc.terms().to_vec();
        terms.extend(
            h_zn.terms()
                .iter()
                .map(|term| crate::poisson::GaussianTerm {
                    c: -term.c,
                    a: term.a,
                }),
        );
        let f = GaussianCombo::new(h_zn.dim(), terms)?;
        Ok(GradedPair { h_zn, h_lc, f })
    }

    pub fn h_zn(&self) -> &GaussianCombo {
        &self.h_zn
    }

    pub fn h_lc(&self) -> &GaussianCombo {
        &self.h_lc
    }

    pub fn f(&self) -> &GaussianCombo {
        &self.f
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedReport {
    pub lattice_label: String,
    pub dim: usize,
    pub t: f64,
    pub shells_checked: usize,
    pub f_nonnegative: bool,
    pub fhat_nonpositive: bool,
    pub first_f_violation: Option<u64>,
    pub first_fhat_violation: Option<u64>,
    pub f_violations: usize,
    pub fhat_violations: usize,
    /// Shells with `F < 0` or `F^ > 0` at any magnitude.
    pub f_strictly_negative: usize,
    pub fhat_strictly_positive: usize,
    pub f_zero: f64,
    pub fhat_zero: f64,
    /// `F^(0) - F(0)`.
    pub fhat0_minus_f0: f64,
    /// `sum' F`.
    pub sum_f: f64,
    /// `sum' F^`.
    pub sum_fhat: f64,
    /// `|F^(0) - F(0) - (sum' F - sum' F^)|`.
    pub residual: f64,
    pub passed: bool,
    /// `1 + h^(0) - h(0)` for `h_zn` and `h_lc`.
    pub bound_zn: f64,
    pub bound_lc: f64,
    pub tails: Tails,
}

pub fn graded_audit(
    pair: &GradedPair,
    n: usize,
    t: f64,
    options: &AuditOptions,
) -> Result<GradedReport> {
    if n < 8 {
        return Err(Error::InvalidParameter(format!(
            "the comparison lattice needs n >= 8, got {n}"
        )));
    }
    check_t(t)?;
    if pair.f.dim() != n {
        return Err(Error::InvalidParameter(format!(
            "graded pair of dimension {} audited in dimension {n}",
            pair.f.dim()
        )));
    }
    let lattice = e8_plus_zn(n)?;
    let f = AuditFunction::Combo(pair.f.clone());
    let max_norm = truncation(n, t, &[&f], options)?;
    let shells = enumerate_shells_with(&lattice, max_norm, options.enumeration)?;
    let terms = exact_shell_terms(&f, &shells, t);
    let mut first_f_violation = None;
    let mut first_fhat_violation = None;
    let mut f_violations = 0;
    let mut fhat_violations = 0;
    let mut f_strictly_negative = 0;
    let mut fhat_strictly_positive = 0;
    for s in &terms {
        let weight = s.count as f64;
        f_strictly_negative += usize::from(s.h < Dd::ZERO);
        fhat_strictly_positive += usize::from(s.hat > Dd::ZERO);
        if s.h.to_f64() / weight < -options.sign_tol {
            f_violations += 1;
            first_f_violation.get_or_insert(s.m);
        }
        if s.hat.to_f64() / weight > options.sign_tol {
            fhat_violations += 1;
            first_fhat_violation.get_or_insert(s.m);
        }
    }
    let sum_f: Dd = terms.iter().map(|s| s.h).sum();
    let sum_fhat: Dd = terms.iter().map(|s| s.hat).sum();
    let f0 = f.h_zero();
    let fhat0 = f.hat_zero();
    let lhs = fhat0 - f0;
    let residual = (lhs - (sum_f - sum_fhat)).abs().to_f64();
    let function_tail = f.tail(max_norm);
    let tails = Tails {
        max_norm,
        theta: 0.0,
        function: function_tail,
        total: function_tail,
    };
    let bound =
        |h: &GaussianCombo| (Dd::ONE + h.fourier_eval_dd(Dd::ZERO) - h.eval_dd(Dd::ZERO)).to_f64();
    Ok(GradedReport {
        lattice_label: lattice.label(),
        dim: n,
        t,
        shells_checked: terms.len(),
        f_nonnegative: f_violations == 0,
        fhat_nonpositive: fhat_violations == 0,
        first_f_violation,
        first_fhat_violation,
        f_violations,
        fhat_violations,
        f_strictly_negative,
        fhat_strictly_positive,
        f_zero: f0.to_f64(),
        fhat_zero: fhat0.to_f64(),
        fhat0_minus_f0: lhs.to_f64(),
        sum_f: sum_f.to_f64(),
        sum_fhat: sum_fhat.to_f64(),
        residual,
        passed: residual <= options.chain_tol + function_tail,
        bound_zn: bound(&pair.h_zn),
        bound_lc: bound(&pair.h_lc),
        tails,
    })
}

/// Exponential envelopes `A_x = a_scale e^{-a_rate |x|^2}` and
/// `B_x = b_scale e^{-b_rate |x|^2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub a_scale: f64,
    pub a_rate: f64,
    pub b_scale: f64,
    pub b_rate: f64,
}

impl Envelope {
    fn check(&self) -> Result<()> {
        for (name, scale, rate) in [
            ("A", self.a_scale, self.a_rate),
            ("B", self.b_scale, self.b_rate),
        ] {
            if !(scale.is_finite() && scale >= 0.0) {
                return Err(Error::EnvelopeNotSummable(format!(
                    "{name} scale must be finite and nonnegative, got {scale}"
                )));
            }
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::EnvelopeNotSummable(format!(
                    "{name} decays at rate {rate}; a positive rate is needed"
                )));
            }
        }
        Ok(())
    }

    /// Bound on both envelope sums beyond `max_norm`.
    pub fn tail(&self, dim: usize, max_norm: u64) -> f64 {
        self.a_scale * shell_tail_bound(dim, self.a_rate, max_norm)
            + self.b_scale * shell_tail_bound(dim, self.b_rate, max_norm)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceElement {
    pub index: usize,
    pub epsilon: f64,
    /// `0 <= h_j - e^{-t m} <= eps_j` and `0 <= -h_j^ <= eps_j` on every
    /// audited shell, within the tolerances.
    pub prop_bounds_hold: bool,
    pub max_h_slack: f64,
    pub max_hat_slack: f64,
    pub chain: SaturationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceLimit {
    pub lattice_label: String,
    pub max_norm: u64,
    pub envelope_tail: f64,
    pub dominated: bool,
    pub domination_failures: usize,
    /// `sum' h_j` over the comparison lattice, per element.
    pub direct_sums: Vec<f64>,
    /// `h_j^(0) - h_j(0) + sum' h_j^`, per element.
    pub poisson_sums: Vec<f64>,
    /// `Theta_{Lambda_c} - 1`, the limit of the direct sums.
    pub direct_limit: f64,
    /// `Theta_{Z^n} - 1`, the limit of the transform side.
    pub poisson_limit: f64,
    /// Transform side minus direct side at the last element.
    pub clash: f64,
    /// `theta_2^4 theta_4^4 theta_3^{n-8}`.
    pub expected_clash: f64,
    pub clash_residual: f64,
    /// Set when the sequence is dominated and its last `eps_j` is within
    /// the chain tolerance, so the limit argument applies.
    pub forced: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub dim: usize,
    pub t: f64,
    pub epsilons: Vec<f64>,
    pub elements: Vec<SequenceElement>,
    pub limit: Option<SequenceLimit>,
}

pub fn sequence_audit(
    hs: &[AuditFunction],
    n: usize,
    t: f64,
    dominators: Option<&Envelope>,
    options: &AuditOptions,
) -> Result<SequenceReport> {
    check_t(t)?;
    if hs.is_empty() {
        return Err(Error::InvalidParameter("empty sequence".into()));
    }
    for h in hs {
        h.admit(options)?;
        if h.dim() != n {
            return Err(Error::InvalidParameter(format!(
                "sequence element of dimension {} in dimension {n}",
                h.dim()
            )));
        }
    }
    if let Some(envelope) = dominators {
        envelope.check()?;
        if n < 8 {
            return Err(Error::InvalidParameter(format!(
                "the limit lattice needs n >= 8, got {n}"
            )));
        }
    }
    let refs: Vec<&AuditFunction> = hs.iter().collect();
    let max_norm = truncation(n, t, &refs, options)?;
    let cube = zn(n)?;
    let cube_shells = enumerate_shells_with(&cube, max_norm, options.enumeration)?;
    let mut elements = Vec::with_capacity(hs.len());
    for (index, h) in hs.iter().enumerate() {
        let chain = chain_with_shells(h, &cube, None, t, &cube_shells, options)?;
        let max_h_slack = chain
            .per_shell
            .iter()
            .map(|s| s.h_slack)
            .fold(f64::NEG_INFINITY, f64::max);
        let max_hat_slack = chain
            .per_shell
            .iter()
            .map(|s| s.hat_slack)
            .fold(f64::NEG_INFINITY, f64::max);
        let prop_bounds_hold = chain.violations.is_empty() && chain.per_point_bounds_hold;
        elements.push(SequenceElement {
            index,
            epsilon: chain.epsilon,
            prop_bounds_hold,
            max_h_slack,
            max_hat_slack,
            chain,
        });
    }
    let epsilons = elements.iter().map(|e| e.epsilon).collect();

    let limit = match dominators {
        None => None,
        Some(envelope) => {
            let envelope_tail = envelope.tail(n, max_norm);
            if envelope_tail > options.tail_tol {
                return Err(Error::EnvelopeNotSummable(format!(
                    "envelope tail {envelope_tail:e} exceeds {:e} at M = {max_norm}",
                    options.tail_tol
                )));
            }
            let lattice = e8_plus_zn(n)?;
            let shells = enumerate_shells_with(&lattice, max_norm, options.enumeration)?;
            let mut domination_failures = 0;
            let mut direct_sums = Vec::with_capacity(hs.len());
            let mut poisson_sums = Vec::with_capacity(hs.len());
            let mut gauss_total = Dd::ZERO;
            for (j, h) in hs.iter().enumerate() {
                let terms = exact_shell_terms(h, &shells, t);
                for s in &terms {
                    let weight = s.count as f64;
                    let m = s.m as f64;
                    let a_bound = envelope.a_scale * (-envelope.a_rate * m).exp();
                    let b_bound = envelope.b_scale * (-envelope.b_rate * m).exp();
                    if (s.h.to_f64() / weight).abs() > a_bound + options.sign_tol
                        || (s.hat.to_f64() / weight).abs() > b_bound + options.sign_tol
                    {
                        domination_failures += 1;
                    }
                }
                let direct: Dd = terms.iter().map(|s| s.h).sum();
                let hat: Dd = terms.iter().map(|s| s.hat).sum();
                direct_sums.push(direct.to_f64());
                poisson_sums.push((h.hat_zero() - h.h_zero() + hat).to_f64());
                if j == 0 {
                    gauss_total = terms.iter().map(|s| s.gauss).sum();
                }
            }
            let theta_zn = theta3_power(t, n)?;
            let expected = e8_gap(t)? * theta3_power(t, n - 8)?;
            let last = hs.len() - 1;
            let clash = poisson_sums[last] - direct_sums[last];
            let dominated = domination_failures == 0;
            let tails = shell_tail_bound(n, t, max_norm) + hs[last].tail(max_norm) + envelope_tail;
            let last_epsilon = elements[last].epsilon;
            Some(SequenceLimit {
                lattice_label: lattice.label(),
                max_norm,
                envelope_tail,
                dominated,
                domination_failures,
                direct_sums,
                poisson_sums,
                direct_limit: gauss_total.to_f64(),
                poisson_limit: (theta_zn - Dd::ONE).to_f64(),
                clash,
                expected_clash: expected.to_f64(),
                clash_residual: (clash - expected.to_f64()).abs(),
                forced: dominated && last_epsilon.abs() <= options.chain_tol + tails,
            })
        }
    };
    Ok(SequenceReport {
        dim: n,
        t,
        epsilons,
        elements,
        limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{e8, random_rotation};

    fn theta_z8(t: f64) -> f64 {
        theta3_power(t, 8).unwrap().to_f64()
    }

    fn doubles() -> AuditOptions {
        AuditOptions {
            allow_test_doubles: true,
            ..AuditOptions::default()
        }
    }

    #[test]
    fn gaussian_is_tight_on_majorant_and_violates_fourier_everywhere() {
        let h = AuditFunction::Combo(GaussianCombo::gaussian(8, 1.0).unwrap());
        let report = chain_audit(&h, &zn(8).unwrap(), None, 1.0, &AuditOptions::default()).unwrap();
        assert!(report.per_shell.iter().all(|s| s.a == 0.0));
        assert_eq!(report.sum_a, 0.0);
        assert_eq!(
            report.verdict,
            Verdict::Violated {
                condition: Condition::Fourier,
                shell: 1
            }
        );
        assert!(report.per_shell.iter().all(|s| s.b < 0.0));
        assert!(report
            .violations
            .iter()
            .all(|v| v.condition == Condition::Fourier));
        assert!(report.bookkeeping_holds, "{}", report.bookkeeping_residual);
    }

    #[test]
    fn chain_has_seven_lines_and_six_steps() {
        let h = AuditFunction::Combo(GaussianCombo::gaussian(8, 1.0).unwrap());
        let report = chain_audit(&h, &e8(), None, 1.0, &AuditOptions::default()).unwrap();
        assert_eq!(report.chain_values.len(), 7);
        assert_eq!(report.steps.len(), 6);
        let poisson = &report.steps[2];
        assert!(poisson.holds && poisson.difference.abs() <= 1e-12);
    }

    #[test]
    fn saturated_double_is_sharp_on_the_cube() {
        let t = 1.0;
        let f = AuditFunction::TestDouble(PrescribedShells::saturated(8, t, theta_z8(t)).unwrap());
        let report = chain_audit(&f, &zn(8).unwrap(), None, t, &doubles()).unwrap();
        assert_eq!(report.verdict, Verdict::Sharp);
        assert!(report.bookkeeping_holds);
        assert!(report.test_double);
    }

    #[test]
    fn test_doubles_need_the_flag() {
        let f = AuditFunction::TestDouble(PrescribedShells::saturated(8, 1.0, 1.0).unwrap());
        let err = chain_audit(&f, &zn(8).unwrap(), None, 1.0, &AuditOptions::default());
        assert_eq!(err.unwrap_err(), Error::TestDoubleRejected);
    }

    #[test]
    fn rotation_leaves_radial_reports_unchanged() {
        let h =
            AuditFunction::Combo(GaussianCombo::from_pairs(8, &[(2.0, 0.7), (-0.5, 1.9)]).unwrap());
        let lattice = e8();
        let plain = chain_audit(&h, &lattice, None, 0.8, &AuditOptions::default()).unwrap();
        let u = random_rotation(8, 11).unwrap();
        let rotated = chain_audit(&h, &lattice, Some(&u), 0.8, &AuditOptions::default()).unwrap();
        let check = rotated.rotation.unwrap();
        assert!(check.invariant);
        assert_eq!(check.points_checked, 240);
        assert!(plain.max_deviation(&rotated) <= 1e-9);
    }

    #[test]
    fn configured_truncation_too_small_is_reported() {
        let h = AuditFunction::Combo(GaussianCombo::gaussian(8, 1.0).unwrap());
        let options = AuditOptions {
            max_norm: Some(3),
            ..AuditOptions::default()
        };
        let err = chain_audit(&h, &zn(8).unwrap(), None, 1.0, &options).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientShells { available: 3, .. }
        ));
    }

    #[test]
    fn collapse_of_saturated_double_breaks_at_poisson_by_the_gap() {
        let t = 1.0;
        let f = AuditFunction::TestDouble(PrescribedShells::saturated(8, t, theta_z8(t)).unwrap());
        let report = e8_collapse_audit(&f, 8, t, &doubles()).unwrap();
        assert_eq!(report.collapse_residual, 0.0);
        assert_eq!(
            report.first_failing_step.as_deref(),
            Some("poisson_summation")
        );
        assert!(report.contradiction_magnitude > 0.0);
        let poisson = report.steps[2].residual;
        assert!((poisson - report.contradiction_magnitude).abs() <= 1e-12);
    }

    #[test]
    fn collapse_of_gaussian_fails_at_fourier_step() {
        let f = AuditFunction::Combo(GaussianCombo::gaussian(12, 1.0).unwrap());
        let report = e8_collapse_audit(&f, 12, 1.0, &AuditOptions::default()).unwrap();
        assert_eq!(
            report.first_failing_step.as_deref(),
            Some("fourier_annihilation")
        );
        assert!(report.gap_consistency <= 1e-12);
    }

    #[test]
    fn collapse_needs_dimension_eight() {
        let f = AuditFunction::Combo(GaussianCombo::gaussian(4, 1.0).unwrap());
        assert!(e8_collapse_audit(&f, 4, 1.0, &AuditOptions::default()).is_err());
    }

    #[test]
    fn graded_pair_of_equal_functions_is_zero() {
        let h = GaussianCombo::from_pairs(8, &[(1.5, 0.9), (-0.25, 2.0)]).unwrap();
        let pair = GradedPair::new(h.clone(), h).unwrap();
        assert_eq!(pair.f().terms().len(), 4);
        let report = graded_audit(&pair, 8, 1.0, &AuditOptions::default()).unwrap();
        assert!(report.fhat0_minus_f0.abs() <= 1e-28);
        assert!(report.sum_f.abs() <= 1e-28);
        assert!(report.sum_fhat.abs() <= 1e-28);
        assert!(report.passed && report.f_nonnegative && report.fhat_nonpositive);
    }

    #[test]
    fn graded_gaussian_pair_violates_fourier_sign_everywhere() {
        let g = GaussianCombo::gaussian(8, 1.0).unwrap();
        let twice = GaussianCombo::from_pairs(8, &[(2.0, 1.0)]).unwrap();
        let pair = GradedPair::new(g, twice).unwrap();
        let report = graded_audit(&pair, 8, 1.0, &AuditOptions::default()).unwrap();
        assert!(report.f_nonnegative);
        assert!(!report.fhat_nonpositive);
        assert_eq!(report.first_fhat_violation, Some(2));
        assert_eq!(report.fhat_strictly_positive, report.shells_checked);
        assert_eq!(report.f_strictly_negative, 0);
        assert!(report.residual <= 1e-12);
    }

    #[test]
    fn sequence_without_envelope_matches_chain() {
        let h = AuditFunction::Combo(GaussianCombo::gaussian(8, 1.0).unwrap());
        let options = AuditOptions::default();
        let report = sequence_audit(std::slice::from_ref(&h), 8, 1.0, None, &options).unwrap();
        assert!(report.limit.is_none());
        let chain = chain_audit(&h, &zn(8).unwrap(), None, 1.0, &options).unwrap();
        assert_eq!(report.elements[0].chain, chain);
    }

    #[test]
    fn nonsummable_envelope_is_rejected() {
        let h = AuditFunction::Combo(GaussianCombo::gaussian(8, 1.0).unwrap());
        let slow = Envelope {
            a_scale: 1.0,
            a_rate: 1e-3,
            b_scale: 1.0,
            b_rate: 1.0,
        };
        let err = sequence_audit(
            std::slice::from_ref(&h),
            8,
            1.0,
            Some(&slow),
            &AuditOptions::default(),
        );
        assert!(matches!(err, Err(Error::EnvelopeNotSummable(_))));
        let flat = Envelope {
            a_rate: 0.0,
            ..slow
        };
        let err = sequence_audit(&[h], 8, 1.0, Some(&flat), &AuditOptions::default());
        assert!(matches!(err, Err(Error::EnvelopeNotSummable(_))));
    }
}
