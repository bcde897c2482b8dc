//! The shell-discretised certificate program.
//!
//! Decision variables are the coefficients `c_k` of
//! `h(x) = sum_k c_k e^{-a_k |x|^2}` over a fixed width dictionary. The
//! program minimises `1 + h^(0) - h(0)` subject to
//!
//! * `h(sqrt m) >= e^{-t m}` and `h^(sqrt m) <= 0` for `m = 1..=M_c`;
//! * tail rows at an anchor `M_T` that make both conditions hold for every
//!   real `r^2 >= M_T`.
//!
//! The tail rows rest on Abel summation: if `f(r) = sum_j d_j e^{-b_j r}`
//! with `b_1 <= b_2 <= ...` and every prefix sum `sum_{j<=J} d_j e^{-b_j M_T}`
//! is nonnegative, then `f(r) >= 0` for all `r >= M_T`, because the weights
//! `e^{-b_j (r - M_T)}` are positive and nonincreasing in `j`.

use serde::{Deserialize, Serialize};

use super::simplex::{self, DenseLp, LpStatus};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::poisson::{GaussianCombo, GaussianTerm};
use crate::theta::{jacobi_theta, ThetaKind};

pub const DEFAULT_DICTIONARY_SIZE: usize = 40;
pub const DEFAULT_SHELLS: u64 = 40;
pub const DEFAULT_COEFF_BOUND: f64 = 1e4;
pub const DEFAULT_MAX_PIVOTS: u64 = 50_000;
pub const DEFAULT_LP_TOLERANCE: f64 = 1e-10;

/// How the width dictionary is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionarySpec {
    /// 40 widths, geometric in `[t/8, 8t]`.
    Default,
    /// `count` widths geometric in `[lo * t, hi * t]`.
    Geometric { lo: f64, hi: f64, count: usize },
    /// Explicit widths.
    Widths(Vec<f64>),
}

impl DictionarySpec {
    /// Parses `default`, `geom:LO:HI:COUNT` (multiples of `t`) or a comma
    /// separated list of widths.
    pub fn parse(text: &str) -> Result<DictionarySpec> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("default") {
            return Ok(DictionarySpec::Default);
        }
        let bad = || Error::InvalidParameter(format!("cannot parse dictionary `{text}`"));
        if let Some(rest) = text.strip_prefix("geom:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            return Ok(DictionarySpec::Geometric {
                lo: parts[0].parse().map_err(|_| bad())?,
                hi: parts[1].parse().map_err(|_| bad())?,
                count: parts[2].parse().map_err(|_| bad())?,
            });
        }
        let widths = text
            .split(',')
            .map(|w| w.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DictionarySpec::Widths(widths))
    }

    pub fn widths(&self, t: f64) -> Result<Vec<f64>> {
        let widths = match self {
            DictionarySpec::Default => geometric(t / 8.0, 8.0 * t, DEFAULT_DICTIONARY_SIZE),
            DictionarySpec::Geometric { lo, hi, count } => {
                if !(*lo > 0.0 && hi >= lo && *count >= 1) {
                    return Err(Error::InvalidParameter(format!(
                        "geometric dictionary needs 0 < lo <= hi and count >= 1, got {lo}, {hi}, {count}"
                    )));
                }
                geometric(lo * t, hi * t, *count)
            }
            DictionarySpec::Widths(w) => w.clone(),
        };
        if widths.is_empty() {
            return Err(Error::InvalidParameter("dictionary is empty".into()));
        }
        if let Some(w) = widths.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "width {w} is not positive"
            )));
        }
        Ok(widths)
    }
}

fn geometric(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    (0..count)
        .map(|k| {
            if k + 1 == count {
                hi
            } else {
                lo * (ratio * k as f64).exp()
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LPProblem {
    pub dim: usize,
    pub t: f64,
    pub dictionary: Vec<f64>,
    /// Shells `1..=M_c` carrying the majorant and transform rows.
    pub shell_norms: Vec<u64>,
    pub tolerance: f64,
    /// Box `|c_k| <= coeff_bound`; `None` leaves the coefficients free.
    pub coeff_bound: Option<f64>,
    /// Anchor of the tail rows (`M_c + 1` when absent); `tail_rows = false`
    /// drops them entirely.
    pub tail_anchor: Option<u64>,
    pub tail_rows: bool,
    pub max_pivots: u64,
}

pub fn build_lp(dim: usize, t: f64, dictionary: &DictionarySpec, shells: u64) -> Result<LPProblem> {
    if dim < 4 {
        return Err(Error::InvalidParameter(format!(
            "dimension must be at least 4, got {dim}"
        )));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t must be positive, got {t}"
        )));
    }
    if shells < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 shells, got {shells}"
        )));
    }
    Ok(LPProblem {
        dim,
        t,
        dictionary: dictionary.widths(t)?,
        shell_norms: (1..=shells).collect(),
        tolerance: DEFAULT_LP_TOLERANCE,
        coeff_bound: Some(DEFAULT_COEFF_BOUND),
        tail_anchor: None,
        tail_rows: true,
        max_pivots: DEFAULT_MAX_PIVOTS,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    /// `h(sqrt m) >= e^{-t m}`.
    Majorant { m: u64 },
    /// `-h^(sqrt m) >= 0`.
    Fourier { m: u64 },
    /// Prefix `len` of the majorant tail ordering.
    MajorantTail { len: usize },
    /// Prefix `len` of the transform tail ordering.
    FourierTail { len: usize },
    /// `c_k <= bound` or `-c_k <= bound`.
    Bound { k: usize },
}

/// `coeffs . c >= rhs`.
#[derive(Clone, Debug)]
pub struct ConstraintRow {
    pub kind: RowKind,
    pub coeffs: Vec<Dd>,
    pub rhs: Dd,
}

impl ConstraintRow {
    pub fn slack(&self, c: &[Dd]) -> Dd {
        self.coeffs.iter().zip(c).map(|(a, x)| *a * *x).sum::<Dd>() - self.rhs
    }
}

impl LPProblem {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 4 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be at least 4, got {}",
                self.dim
            )));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t must be positive, got {}",
                self.t
            )));
        }
        if self.dictionary.is_empty()
            || self.dictionary.iter().any(|a| !(a.is_finite() && *a > 0.0))
        {
            return Err(Error::InvalidParameter(
                "dictionary widths must be positive".into(),
            ));
        }
        if self.shell_norms.len() < 2 || self.shell_norms.contains(&0) {
            return Err(Error::InvalidParameter(
                "need at least 2 nonzero shells".into(),
            ));
        }
        if let Some(b) = self.coeff_bound {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "coefficient bound {b} is not positive"
                )));
            }
        }
        Ok(())
    }

    pub fn max_shell(&self) -> u64 {
        self.shell_norms.iter().copied().max().unwrap_or(0)
    }

    pub fn anchor(&self) -> u64 {
        self.tail_anchor.unwrap_or(self.max_shell() + 1)
    }

    /// `(pi / a_k)^{n/2}`, the transform coefficient of a unit term.
    fn transform_scale(&self, k: usize) -> Dd {
        (Dd::PI / Dd::from_f64(self.dictionary[k])).pow_half(self.dim as u32)
    }

    fn transform_width(&self, k: usize) -> Dd {
        Dd::PI.sqr() / Dd::from_f64(self.dictionary[k])
    }

    /// The `2 M_c` shell rows, majorant rows first.
    pub fn shell_rows(&self) -> Vec<ConstraintRow> {
        let t = Dd::from_f64(self.t);
        let mut rows = Vec::with_capacity(2 * self.shell_norms.len());
        for &m in &self.shell_norms {
            let md = Dd::from_u64(m);
            rows.push(ConstraintRow {
                kind: RowKind::Majorant { m },
                coeffs: self.dictionary.iter().map(|&a| (-(md * a)).exp()).collect(),
                rhs: (-(md * t)).exp(),
            });
        }
        for &m in &self.shell_norms {
            let md = Dd::from_u64(m);
            rows.push(ConstraintRow {
                kind: RowKind::Fourier { m },
                coeffs: (0..self.dictionary.len())
                    .map(|k| -(self.transform_scale(k) * (-(md * self.transform_width(k))).exp()))
                    .collect(),
                rhs: Dd::ZERO,
            });
        }
        rows
    }

    /// Abel prefix rows making both conditions hold for all `r^2 >= M_T`.
    pub fn tail_rows(&self) -> Vec<ConstraintRow> {
        if !self.tail_rows {
            return Vec::new();
        }
        let k_len = self.dictionary.len();
        let anchor = Dd::from_u64(self.anchor());
        let t = Dd::from_f64(self.t);
        let mut rows = Vec::new();

        // Majorant: widths ascending, the Gaussian -e^{-t r} placed after
        // dictionary entries of equal width.
        let mut order: Vec<Option<usize>> = (0..k_len).map(Some).collect();
        order.push(None);
        let width = |e: &Option<usize>| e.map_or(self.t, |k| self.dictionary[k]);
        order.sort_by(|x, y| {
            width(x)
                .total_cmp(&width(y))
                .then(x.is_none().cmp(&y.is_none()))
                .then(x.cmp(y))
        });
        let mut coeffs = vec![Dd::ZERO; k_len];
        let mut rhs = Dd::ZERO;
        for (len, entry) in order.iter().enumerate() {
            match entry {
                Some(k) => coeffs[*k] = (-(anchor * self.dictionary[*k])).exp(),
                None => rhs = (-(anchor * t)).exp(),
            }
            rows.push(ConstraintRow {
                kind: RowKind::MajorantTail { len: len + 1 },
                coeffs: coeffs.clone(),
                rhs,
            });
        }

        // Transform: widths pi^2/a ascending, i.e. a descending.
        let mut order: Vec<usize> = (0..k_len).collect();
        order.sort_by(|&x, &y| {
            self.dictionary[y]
                .total_cmp(&self.dictionary[x])
                .then(x.cmp(&y))
        });
        let mut coeffs = vec![Dd::ZERO; k_len];
        for (len, &k) in order.iter().enumerate() {
            coeffs[k] = -(self.transform_scale(k) * (-(anchor * self.transform_width(k))).exp());
            rows.push(ConstraintRow {
                kind: RowKind::FourierTail { len: len + 1 },
                coeffs: coeffs.clone(),
                rhs: Dd::ZERO,
            });
        }
        rows
    }

    /// `(constant, per-coefficient)` parts of `1 + h^(0) - h(0)`.
    pub fn objective_coeffs(&self) -> (Dd, Vec<Dd>) {
        let coeffs = (0..self.dictionary.len())
            .map(|k| self.transform_scale(k) - Dd::ONE)
            .collect();
        (Dd::ONE, coeffs)
    }

    pub fn objective_at(&self, c: &[f64]) -> Dd {
        let (constant, coeffs) = self.objective_coeffs();
        constant + coeffs.iter().zip(c).map(|(a, x)| *a * *x).sum::<Dd>()
    }

    pub fn combo(&self, c: &[f64]) -> Result<GaussianCombo> {
        GaussianCombo::new(
            self.dim,
            c.iter()
                .zip(&self.dictionary)
                .map(|(&c, &a)| GaussianTerm { c, a })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellSlack {
    pub m: u64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// Nonnegative row multipliers proving infeasibility.
    DualRay,
    /// Feasible direction along which the objective decreases.
    PrimalRay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    /// Nonzero entries: constraint rows for a dual ray, coefficients for a
    /// primal ray.
    pub entries: Vec<(String, f64)>,
    /// Dual ray: `min_j (A^T w)_j`. Primal ray: worst row change `max (A d)_i`.
    pub lhs_margin: f64,
    /// Dual ray: `b^T w`. Primal ray: `c^T d`.
    pub rhs_margin: f64,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LPSolution {
    pub status: LpStatus,
    pub coeffs: Vec<f64>,
    /// `1 + h^(0) - h(0)` recomputed from the rounded coefficients.
    pub objective: f64,
    /// `h(sqrt m) - e^{-t m}` per constrained shell.
    pub slacks_majorize: Vec<ShellSlack>,
    /// `-h^(sqrt m)` per constrained shell.
    pub slacks_fourier: Vec<ShellSlack>,
    /// Smallest slack over the tail rows (absent when there are none).
    pub tail_min_slack: Option<f64>,
    pub theta_zn: f64,
    /// `objective - Theta_{Z^n}(t)`.
    pub epsilon: f64,
    pub pivots: u64,
    pub duality_gap: f64,
    pub witness: Option<Witness>,
}

impl LPSolution {
    pub fn combo(&self, problem: &LPProblem) -> Result<GaussianCombo> {
        problem.combo(&self.coeffs)
    }

    pub fn min_slack(&self) -> f64 {
        self.slacks_majorize
            .iter()
            .chain(&self.slacks_fourier)
            .map(|s| s.value)
            .chain(self.tail_min_slack)
            .fold(f64::INFINITY, f64::min)
    }
}

fn row_label(kind: &RowKind) -> String {
    match kind {
        RowKind::Majorant { m } => format!("majorant[{m}]"),
        RowKind::Fourier { m } => format!("fourier[{m}]"),
        RowKind::MajorantTail { len } => format!("majorant_tail[{len}]"),
        RowKind::FourierTail { len } => format!("fourier_tail[{len}]"),
        RowKind::Bound { k } => format!("bound[{k}]"),
    }
}

pub fn solve_lp(problem: &LPProblem) -> Result<LPSolution> {
    problem.validate()?;
    let k_len = problem.dictionary.len();
    let mut rows = problem.shell_rows();
    rows.extend(problem.tail_rows());
    let (_, objective) = problem.objective_coeffs();

    // Standard form over y >= 0: either y = c + C (boxed) or c = y+ - y- (free).
    let (n_vars, shift) = match problem.coeff_bound {
        Some(bound) => (k_len, Some(bound)),
        None => (2 * k_len, None),
    };
    let expand = |coeffs: &[Dd]| -> Vec<Dd> {
        match shift {
            Some(_) => coeffs.to_vec(),
            None => coeffs
                .iter()
                .copied()
                .chain(coeffs.iter().map(|v| -*v))
                .collect(),
        }
    };
    let mut lp = DenseLp {
        objective: expand(&objective),
        rows: Vec::new(),
        rhs: Vec::new(),
    };
    let mut kinds = Vec::new();
    for row in &rows {
        // coeffs . c >= rhs  <=>  -coeffs . y <= -rhs - C sum(coeffs)
        let mut lhs: Vec<Dd> = expand(&row.coeffs).into_iter().map(|v| -v).collect();
        let mut rhs = -row.rhs;
        if let Some(bound) = shift {
            rhs -= row.coeffs.iter().copied().sum::<Dd>() * bound;
        }
        let scale = lhs.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            if rhs.to_f64() >= 0.0 {
                continue;
            }
        } else {
            let inv = Dd::from_f64(scale).recip();
            for v in lhs.iter_mut() {
                *v *= inv;
            }
            rhs *= inv;
        }
        lp.rows.push(lhs);
        lp.rhs.push(rhs);
        kinds.push(row.kind);
    }
    if let Some(bound) = shift {
        for k in 0..k_len {
            let mut lhs = vec![Dd::ZERO; n_vars];
            lhs[k] = Dd::ONE;
            lp.rows.push(lhs);
            lp.rhs.push(Dd::from_f64(2.0 * bound));
            kinds.push(RowKind::Bound { k });
        }
    }
    let cost_scale = lp
        .objective
        .iter()
        .map(|v| v.to_f64().abs())
        .fold(0.0, f64::max);
    if cost_scale > 0.0 {
        let inv = Dd::from_f64(cost_scale).recip();
        for v in lp.objective.iter_mut() {
            *v *= inv;
        }
    }

    let outcome = simplex::solve(&lp, problem.max_pivots);
    let coeffs_dd: Vec<Dd> = match shift {
        Some(bound) => outcome.primal.iter().map(|y| *y - bound).collect(),
        None => (0..k_len)
            .map(|k| outcome.primal[k] - outcome.primal[k + k_len])
            .collect(),
    };
    let mut witness = None;
    let mut duality_gap = 0.0;
    match outcome.status {
        LpStatus::Optimal => {
            let gap = outcome.primal_objective(&lp) - outcome.dual_objective(&lp);
            duality_gap = gap.abs().to_f64() * cost_scale.max(1.0);
        }
        LpStatus::Infeasible => {
            let w = outcome.farkas.clone().unwrap_or_default();
            let (lhs_margin, rhs_margin) = simplex::farkas_margins(&lp, &w);
            let w_ok = w.iter().all(|v| v.to_f64() >= 0.0);
            let entries = w
                .iter()
                .zip(&kinds)
                .filter(|(v, _)| v.to_f64() != 0.0)
                .map(|(v, kind)| (row_label(kind), v.to_f64()))
                .collect();
            witness = Some(Witness {
                kind: WitnessKind::DualRay,
                entries,
                lhs_margin,
                rhs_margin,
                verified: w_ok && lhs_margin >= -1e-20 && rhs_margin < 0.0,
            });
        }
        LpStatus::Unbounded => {
            let mut d = outcome.ray.clone().unwrap_or_default();
            let norm = d.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
            if norm > 0.0 {
                let inv = Dd::ONE / Dd::from_f64(norm);
                for v in d.iter_mut() {
                    *v *= inv;
                }
            }
            let worst_row = lp
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&d)
                        .map(|(a, x)| *a * *x)
                        .sum::<Dd>()
                        .to_f64()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let cost: f64 = lp
                .objective
                .iter()
                .zip(&d)
                .map(|(a, x)| *a * *x)
                .sum::<Dd>()
                .to_f64();
            let direction: Vec<f64> = match shift {
                Some(_) => d.iter().map(|v| v.to_f64()).collect(),
                None => (0..k_len).map(|k| (d[k] - d[k + k_len]).to_f64()).collect(),
            };
            witness = Some(Witness {
                kind: WitnessKind::PrimalRay,
                entries: direction
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(k, v)| (format!("c[{k}]"), *v))
                    .collect(),
                lhs_margin: worst_row,
                rhs_margin: cost,
                verified: d.iter().all(|v| v.to_f64() >= -1e-20)
                    && worst_row <= 1e-20
                    && cost < -1e-20,
            });
        }
        LpStatus::IterLimit => {}
    }

    let optimal = outcome.status == LpStatus::Optimal;
    let coeffs: Vec<f64> = if optimal {
        coeffs_dd.iter().map(|v| v.to_f64()).collect()
    } else {
        vec![0.0; k_len]
    };
    let c_dd: Vec<Dd> = coeffs.iter().map(|&v| Dd::from_f64(v)).collect();
    let shell_rows = problem.shell_rows();
    let (maj, four) = shell_rows.split_at(problem.shell_norms.len());
    let slacks = |rows: &[ConstraintRow]| -> Vec<ShellSlack> {
        rows.iter()
            .map(|row| ShellSlack {
                m: match row.kind {
                    RowKind::Majorant { m } | RowKind::Fourier { m } => m,
                    _ => 0,
                },
                value: row.slack(&c_dd).to_f64(),
            })
            .collect()
    };
    let tail_min_slack = problem
        .tail_rows()
        .iter()
        .map(|row| row.slack(&c_dd).to_f64())
        .reduce(f64::min);
    let objective = problem.objective_at(&coeffs);
    let theta_zn = theta_zn(problem.dim, problem.t)?;
    Ok(LPSolution {
        status: outcome.status,
        coeffs,
        objective: objective.to_f64(),
        slacks_majorize: slacks(maj),
        slacks_fourier: slacks(four),
        tail_min_slack,
        theta_zn: theta_zn.to_f64(),
        epsilon: (objective - theta_zn).to_f64(),
        pivots: outcome.pivots,
        duality_gap,
        witness,
    })
}

/// `Theta_{Z^n}(t) = theta_3(t)^n` in double-double.
pub fn theta_zn(dim: usize, t: f64) -> Result<Dd> {
    Ok(jacobi_theta(ThetaKind::Three, t)?
        .precise()
        .powi(dim as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_of_the_program() {
        let p = build_lp(8, 1.0, &DictionarySpec::Default, 40).unwrap();
        assert_eq!(p.dictionary.len(), 40);
        assert_eq!(p.shell_rows().len(), 80);
        assert!((p.dictionary[0] - 0.125).abs() < 1e-15);
        assert_eq!(p.dictionary[39], 8.0);
        assert_eq!(p.tail_rows().len(), 41 + 40);
    }

    #[test]
    fn build_rejects_bad_parameters() {
        assert!(build_lp(3, 1.0, &DictionarySpec::Default, 40).is_err());
        assert!(build_lp(8, 0.0, &DictionarySpec::Default, 40).is_err());
        assert!(build_lp(8, 1.0, &DictionarySpec::Default, 1).is_err());
        assert!(build_lp(8, 1.0, &DictionarySpec::Widths(vec![]), 4).is_err());
        assert!(build_lp(8, 1.0, &DictionarySpec::Widths(vec![-1.0]), 4).is_err());
    }

    #[test]
    fn dictionary_parsing() {
        assert_eq!(
            DictionarySpec::parse("default").unwrap(),
            DictionarySpec::Default
        );
        assert_eq!(
            DictionarySpec::parse("1.0, 2.5").unwrap(),
            DictionarySpec::Widths(vec![1.0, 2.5])
        );
        assert_eq!(
            DictionarySpec::parse("geom:0.5:2:5").unwrap(),
            DictionarySpec::Geometric {
                lo: 0.5,
                hi: 2.0,
                count: 5
            }
        );
        assert!(DictionarySpec::parse("geom:1:2").is_err());
        assert!(DictionarySpec::parse("x").is_err());
    }

    #[test]
    fn single_gaussian_is_infeasible() {
        let p = build_lp(8, 1.0, &DictionarySpec::Widths(vec![1.0]), 40).unwrap();
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
        let w = s.witness.unwrap();
        assert_eq!(w.kind, WitnessKind::DualRay);
        assert!(w.verified, "{w:?}");
    }

    #[test]
    fn free_coefficients_without_tail_rows_are_unbounded() {
        let mut p = build_lp(8, 1.0, &DictionarySpec::Default, 10).unwrap();
        p.coeff_bound = None;
        p.tail_rows = false;
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
        let w = s.witness.unwrap();
        assert!(w.verified, "{w:?}");
    }

    #[test]
    fn default_instance_is_optimal_and_above_the_bound() {
        let p = build_lp(8, 1.0, &DictionarySpec::Default, 40).unwrap();
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.epsilon > 0.0);
        assert!(s.min_slack() >= -p.tolerance);
        assert!(s.duality_gap <= p.tolerance);
    }

    #[test]
    fn json_round_trip() {
        let p = build_lp(8, 0.5, &DictionarySpec::Default, 6).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<LPProblem>(&text).unwrap(), p);
        let s = solve_lp(&p).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<LPSolution>(&text).unwrap(), s);
    }

    #[test]
    fn more_shells_never_lower_the_optimum() {
        let mut coarse = build_lp(8, 1.0, &DictionarySpec::Default, 20).unwrap();
        let mut fine = build_lp(8, 1.0, &DictionarySpec::Default, 40).unwrap();
        coarse.tail_anchor = Some(41);
        fine.tail_anchor = Some(41);
        let a = solve_lp(&coarse).unwrap();
        let b = solve_lp(&fine).unwrap();
        assert_eq!(a.status, LpStatus::Optimal);
        assert_eq!(b.status, LpStatus::Optimal);
        assert!(
            b.objective >= a.objective - coarse.tolerance,
            "{} {}",
            a.objective,
            b.objective
        );
    }

    #[test]
    fn more_widths_never_raise_the_optimum() {
        let full = DictionarySpec::Geometric {
            lo: 0.125,
            hi: 8.0,
            count: 41,
        }
        .widths(1.0)
        .unwrap();
        let half: Vec<f64> = full.iter().step_by(2).copied().collect();
        let small =
            solve_lp(&build_lp(8, 1.0, &DictionarySpec::Widths(half), 30).unwrap()).unwrap();
        let large =
            solve_lp(&build_lp(8, 1.0, &DictionarySpec::Widths(full), 30).unwrap()).unwrap();
        assert_eq!(small.status, LpStatus::Optimal);
        assert_eq!(large.status, LpStatus::Optimal);
        assert!(
            large.objective <= small.objective + 1e-10,
            "{} {}",
            small.objective,
            large.objective
        );
    }

    #[test]
    fn repeated_solves_are_bit_identical() {
        let p = build_lp(8, 2.0, &DictionarySpec::Default, 40).unwrap();
        let a = serde_json::to_string(&solve_lp(&p).unwrap()).unwrap();
        let b = serde_json::to_string(&solve_lp(&p).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
