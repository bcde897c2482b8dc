//! Dense two-phase tableau simplex in double-double arithmetic.
//!
//! Solves `min c^T y` subject to `A y <= b`, `y >= 0`. Pivoting follows
//! Bland's rule: the entering column is the lowest-index column with a
//! negative reduced cost and ratio-test ties go to the lowest basic index.
//! Every outcome carries a witness that can be checked independently of
//! the tableau: primal and dual vectors on optimality, a Farkas vector on
//! infeasibility and an improving ray on unboundedness.

use serde::{Deserialize, Serialize};

use crate::dd::Dd;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

/// `min objective^T y` s.t. `rows * y <= rhs`, `y >= 0`.
#[derive(Clone, Debug)]
pub struct DenseLp {
    pub objective: Vec<Dd>,
    pub rows: Vec<Vec<Dd>>,
    pub rhs: Vec<Dd>,
}

#[derive(Clone, Debug)]
pub struct SimplexOutcome {
    pub status: LpStatus,
    /// Primal point (meaningful on `Optimal`).
    pub primal: Vec<Dd>,
    /// Row multipliers `w >= 0` with `A^T w + c >= 0` (on `Optimal`).
    pub dual: Vec<Dd>,
    /// `w >= 0` with `A^T w >= 0` and `b^T w < 0` (on `Infeasible`).
    pub farkas: Option<Vec<Dd>>,
    /// `d >= 0` with `A d <= 0` and `c^T d < 0` (on `Unbounded`).
    pub ray: Option<Vec<Dd>>,
    pub pivots: u64,
}

impl SimplexOutcome {
    pub fn primal_objective(&self, lp: &DenseLp) -> Dd {
        dot(&lp.objective, &self.primal)
    }

    /// `-b^T w`, a lower bound on the optimum for any dual-feasible `w`.
    pub fn dual_objective(&self, lp: &DenseLp) -> Dd {
        -dot(&lp.rhs, &self.dual)
    }
}

fn dot(a: &[Dd], b: &[Dd]) -> Dd {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

const PIVOT_TOL: f64 = 1e-24;
const COST_TOL: f64 = 1e-26;
const FEAS_TOL: f64 = 1e-24;

struct Tableau {
    /// Constraint rows, each `cols + 1` wide with the right-hand side last.
    t: Vec<Vec<Dd>>,
    /// Reduced costs, `cols + 1` wide with minus the objective value last.
    cost: Vec<Dd>,
    basis: Vec<usize>,
    cols: usize,
    /// Columns allowed to enter.
    enterable: Vec<bool>,
}

enum Step {
    Optimal,
    Unbounded(usize),
    IterLimit,
}

impl Tableau {
    fn pivot(&mut self, r: usize, e: usize) {
        let inv = self.t[r][e].recip();
        for v in self.t[r].iter_mut() {
            *v *= inv;
        }
        self.t[r][e] = Dd::ONE;
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f.hi() == 0.0 {
                continue;
            }
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if p.hi() != 0.0 {
                    *v -= f * *p;
                }
            }
            row[e] = Dd::ZERO;
        }
        let f = self.cost[e];
        if f.hi() != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                if p.hi() != 0.0 {
                    *v -= f * *p;
                }
            }
            self.cost[e] = Dd::ZERO;
        }
        self.basis[r] = e;
    }

    fn run(&mut self, pivots: &mut u64, max_pivots: u64) -> Step {
        loop {
            let scale = self.cost[..self.cols]
                .iter()
                .map(|v| v.to_f64().abs())
                .fold(1.0, f64::max);
            let entering = (0..self.cols)
                .find(|&j| self.enterable[j] && self.cost[j].to_f64() < -COST_TOL * scale);
            let Some(e) = entering else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, Dd)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[e];
                if a.to_f64() <= PIVOT_TOL {
                    continue;
                }
                let rhs = row[self.cols];
                let rhs = if rhs.to_f64() < 0.0 { Dd::ZERO } else { rhs };
                let ratio = rhs / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = best else {
                return Step::Unbounded(e);
            };
            if *pivots >= max_pivots {
                return Step::IterLimit;
            }
            self.pivot(r, e);
            *pivots += 1;
        }
    }

    fn set_cost(&mut self, costs: &[Dd]) {
        let mut cost = vec![Dd::ZERO; self.cols + 1];
        cost[..costs.len()].copy_from_slice(costs);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = if b < costs.len() { costs[b] } else { Dd::ZERO };
            if cb.hi() == 0.0 {
                continue;
            }
            for (v, x) in cost.iter_mut().zip(&self.t[i]) {
                *v -= cb * *x;
            }
        }
        self.cost = cost;
    }

    fn column_value(&self, col: usize) -> Dd {
        self.basis
            .iter()
            .position(|&b| b == col)
            .map(|i| self.t[i][self.cols])
            .unwrap_or(Dd::ZERO)
    }
}

pub fn solve(lp: &DenseLp, max_pivots: u64) -> SimplexOutcome {
    let n = lp.objective.len();
    let m = lp.rows.len();
    let flipped: Vec<bool> = lp.rhs.iter().map(|b| b.to_f64() < 0.0).collect();
    let n_art = flipped.iter().filter(|&&f| f).count();
    let cols = n + m + n_art;
    let mut t = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = n + m;
    for i in 0..m {
        let sign = if flipped[i] { -1.0 } else { 1.0 };
        let mut row = vec![Dd::ZERO; cols + 1];
        for (entry, &a) in row.iter_mut().zip(&lp.rows[i]) {
            *entry = a * sign;
        }
        row[n + i] = Dd::from_f64(sign);
        row[cols] = lp.rhs[i] * sign;
        if flipped[i] {
            row[art] = Dd::ONE;
            basis.push(art);
            art += 1;
        } else {
            basis.push(n + i);
        }
        t.push(row);
    }
    let mut tab = Tableau {
        t,
        cost: Vec::new(),
        basis,
        cols,
        enterable: vec![true; cols],
    };
    let mut pivots = 0u64;
    let slack_reduced_costs =
        |tab: &Tableau| -> Vec<Dd> { (0..m).map(|i| tab.cost[n + i]).collect() };

    if n_art > 0 {
        let mut phase1 = vec![Dd::ZERO; cols];
        for v in phase1.iter_mut().skip(n + m) {
            *v = Dd::ONE;
        }
        tab.set_cost(&phase1);
        loop {
            match tab.run(&mut pivots, max_pivots) {
                Step::IterLimit => return unfinished(LpStatus::IterLimit, n, m, pivots),
                // The phase one objective is bounded below by zero, so a column
                // without an admissible pivot carries only rounding noise.
                Step::Unbounded(e) => tab.enterable[e] = false,
                Step::Optimal => break,
            }
        }
        let mut restored = vec![true; cols];
        restored[n + m..].fill(false);
        let infeasibility = -tab.cost[cols];
        let rhs_scale = lp.rhs.iter().map(|b| b.to_f64().abs()).fold(1.0, f64::max);
        if infeasibility.to_f64() > FEAS_TOL * rhs_scale {
            let farkas = slack_reduced_costs(&tab);
            return SimplexOutcome {
                status: LpStatus::Infeasible,
                primal: vec![Dd::ZERO; n],
                dual: vec![Dd::ZERO; m],
                farkas: Some(farkas),
                ray: None,
                pivots,
            };
        }
        // Drive zero-valued artificials out of the basis where possible.
        for r in 0..m {
            if tab.basis[r] < n + m {
                continue;
            }
            let replacement = (0..n + m).find(|&j| tab.t[r][j].to_f64().abs() > PIVOT_TOL);
            if let Some(e) = replacement {
                tab.pivot(r, e);
            }
        }
        tab.enterable = restored;
    }

    tab.set_cost(&lp.objective);
    match tab.run(&mut pivots, max_pivots) {
        Step::IterLimit => unfinished(LpStatus::IterLimit, n, m, pivots),
        Step::Unbounded(e) => {
            let mut ray = vec![Dd::ZERO; n];
            if e < n {
                ray[e] = Dd::ONE;
            }
            for (i, &b) in tab.basis.iter().enumerate() {
                if b < n {
                    ray[b] = -tab.t[i][e];
                }
            }
            SimplexOutcome {
                status: LpStatus::Unbounded,
                primal: (0..n).map(|j| tab.column_value(j)).collect(),
                dual: vec![Dd::ZERO; m],
                farkas: None,
                ray: Some(ray),
                pivots,
            }
        }
        Step::Optimal => {
            let (primal, dual) = match refine(lp, &tab.basis) {
                Some(refined) => refined,
                None => (
                    (0..n).map(|j| tab.column_value(j)).collect(),
                    slack_reduced_costs(&tab),
                ),
            };
            SimplexOutcome {
                status: LpStatus::Optimal,
                primal,
                dual,
                farkas: None,
                ray: None,
                pivots,
            }
        }
    }
}

/// Recomputes the basic solution and the row multipliers of the final
/// basis from a fresh factorisation, which avoids the error the tableau
/// accumulates over many pivots.
fn refine(lp: &DenseLp, basis: &[usize]) -> Option<(Vec<Dd>, Vec<Dd>)> {
    let n = lp.objective.len();
    let m = lp.rows.len();
    // Column of [A | I] in the original row orientation; a basic artificial
    // stands in for the slack of its row.
    let column = |j: usize, row: usize| -> Dd {
        if j < n {
            lp.rows[row][j]
        } else if j < n + m {
            if j - n == row {
                Dd::ONE
            } else {
                Dd::ZERO
            }
        } else {
            Dd::ZERO
        }
    };
    let mut b_mat = vec![vec![Dd::ZERO; m]; m];
    for (pos, &j) in basis.iter().enumerate() {
        for (row, b_row) in b_mat.iter_mut().enumerate() {
            b_row[pos] = column(j, row);
        }
        if j >= n + m {
            b_mat[pos][pos] = Dd::ONE;
        }
    }
    let lu = Lu::factor(&b_mat)?;
    let x_b = lu.solve_refined(&b_mat, &lp.rhs, false);
    let c_b: Vec<Dd> = basis
        .iter()
        .map(|&j| if j < n { lp.objective[j] } else { Dd::ZERO })
        .collect();
    let u = lu.solve_refined(&b_mat, &c_b, true);
    let mut primal = vec![Dd::ZERO; n];
    for (pos, &j) in basis.iter().enumerate() {
        if j < n {
            primal[j] = x_b[pos];
        }
    }
    let dual = u.iter().map(|v| -*v).collect();
    Some((primal, dual))
}

/// LU factorisation with partial pivoting, `P B = L U`.
struct Lu {
    lu: Vec<Vec<Dd>>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(b: &[Vec<Dd>]) -> Option<Lu> {
        let m = b.len();
        let mut lu = b.to_vec();
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let p = (k..m).max_by(|&x, &y| {
                lu[x][k]
                    .to_f64()
                    .abs()
                    .total_cmp(&lu[y][k].to_f64().abs())
                    .then(y.cmp(&x))
            })?;
            if lu[p][k].hi() == 0.0 {
                return None;
            }
            lu.swap(k, p);
            perm.swap(k, p);
            let inv = lu[k][k].recip();
            let pivot_row = lu[k].clone();
            for row in lu.iter_mut().skip(k + 1) {
                if row[k].hi() == 0.0 {
                    continue;
                }
                let f = row[k] * inv;
                row[k] = f;
                for j in k + 1..m {
                    if pivot_row[j].hi() != 0.0 {
                        row[j] -= f * pivot_row[j];
                    }
                }
            }
        }
        Some(Lu { lu, perm })
    }

    /// Solves `B x = rhs` or, with `transpose`, `B^T x = rhs`.
    fn solve(&self, rhs: &[Dd], transpose: bool) -> Vec<Dd> {
        let m = rhs.len();
        if !transpose {
            let mut y: Vec<Dd> = self.perm.iter().map(|&p| rhs[p]).collect();
            for i in 0..m {
                for j in 0..i {
                    let l = self.lu[i][j];
                    if l.hi() != 0.0 {
                        y[i] = y[i] - l * y[j];
                    }
                }
            }
            for i in (0..m).rev() {
                for j in i + 1..m {
                    let u = self.lu[i][j];
                    if u.hi() != 0.0 {
                        y[i] = y[i] - u * y[j];
                    }
                }
                y[i] = y[i] / self.lu[i][i];
            }
            y
        } else {
            // B^T = U^T L^T P, so solve U^T z = rhs, L^T w = z, x = P^T w.
            let mut z = rhs.to_vec();
            for i in 0..m {
                for j in 0..i {
                    let u = self.lu[j][i];
                    if u.hi() != 0.0 {
                        z[i] = z[i] - u * z[j];
                    }
                }
                z[i] = z[i] / self.lu[i][i];
            }
            for i in (0..m).rev() {
                for j in i + 1..m {
                    let l = self.lu[j][i];
                    if l.hi() != 0.0 {
                        z[i] = z[i] - l * z[j];
                    }
                }
            }
            let mut x = vec![Dd::ZERO; m];
            for (k, &p) in self.perm.iter().enumerate() {
                x[p] = z[k];
            }
            x
        }
    }

    fn solve_refined(&self, b: &[Vec<Dd>], rhs: &[Dd], transpose: bool) -> Vec<Dd> {
        let m = rhs.len();
        let mut x = self.solve(rhs, transpose);
        for _ in 0..3 {
            let residual: Vec<Dd> = (0..m)
                .map(|i| {
                    let mut r = rhs[i];
                    for j in 0..m {
                        let a = if transpose { b[j][i] } else { b[i][j] };
                        if a.hi() != 0.0 {
                            r -= a * x[j];
                        }
                    }
                    r
                })
                .collect();
            let delta = self.solve(&residual, transpose);
            for (v, d) in x.iter_mut().zip(&delta) {
                *v += *d;
            }
        }
        x
    }
}

fn unfinished(status: LpStatus, n: usize, m: usize, pivots: u64) -> SimplexOutcome {
    SimplexOutcome {
        status,
        primal: vec![Dd::ZERO; n],
        dual: vec![Dd::ZERO; m],
        farkas: None,
        ray: None,
        pivots,
    }
}

/// Maximum violation of `A y <= b`, `y >= 0` at `y`.
pub fn primal_violation(lp: &DenseLp, y: &[Dd]) -> f64 {
    let mut worst: f64 = 0.0;
    for v in y {
        worst = worst.max(-v.to_f64());
    }
    for (row, b) in lp.rows.iter().zip(&lp.rhs) {
        worst = worst.max((dot(row, y) - *b).to_f64());
    }
    worst
}

/// `(min_j (A^T w)_j, b^T w)` for a candidate Farkas vector.
pub fn farkas_margins(lp: &DenseLp, w: &[Dd]) -> (f64, f64) {
    let n = lp.objective.len();
    let mut min_col = f64::INFINITY;
    for j in 0..n {
        let s: Dd = lp.rows.iter().zip(w).map(|(row, wi)| row[j] * *wi).sum();
        min_col = min_col.min(s.to_f64());
    }
    (min_col, dot(&lp.rhs, w).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(objective: &[f64], rows: &[&[f64]], rhs: &[f64]) -> DenseLp {
        DenseLp {
            objective: objective.iter().map(|&v| Dd::from_f64(v)).collect(),
            rows: rows
                .iter()
                .map(|r| r.iter().map(|&v| Dd::from_f64(v)).collect())
                .collect(),
            rhs: rhs.iter().map(|&v| Dd::from_f64(v)).collect(),
        }
    }

    #[test]
    fn textbook_optimum() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
        let p = lp(
            &[-3.0, -5.0],
            &[&[1.0, 0.0], &[0.0, 2.0], &[3.0, 2.0]],
            &[4.0, 12.0, 18.0],
        );
        let out = solve(&p, 100);
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.primal[0].to_f64(), 2.0);
        assert_eq!(out.primal[1].to_f64(), 6.0);
        assert_eq!(out.primal_objective(&p).to_f64(), -36.0);
        assert_eq!(out.dual_objective(&p).to_f64(), -36.0);
        assert!(out.dual.iter().all(|w| w.to_f64() >= 0.0));
    }

    #[test]
    fn phase_one_with_lower_bounds() {
        // min x + y s.t. x + y >= 2, x - y <= 1, y <= 3
        let p = lp(
            &[1.0, 1.0],
            &[&[-1.0, -1.0], &[1.0, -1.0], &[0.0, 1.0]],
            &[-2.0, 1.0, 3.0],
        );
        let out = solve(&p, 100);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.primal_objective(&p).to_f64() - 2.0).abs() < 1e-28);
        assert!(primal_violation(&p, &out.primal) <= 1e-28);
    }

    #[test]
    fn infeasible_has_farkas_vector() {
        // x >= 1 and x <= 0
        let p = lp(&[0.0], &[&[-1.0], &[1.0]], &[-1.0, 0.0]);
        let out = solve(&p, 100);
        assert_eq!(out.status, LpStatus::Infeasible);
        let w = out.farkas.unwrap();
        assert!(w.iter().all(|v| v.to_f64() >= 0.0));
        let (col, rhs) = farkas_margins(&p, &w);
        assert!(col >= 0.0 && rhs < 0.0);
    }

    #[test]
    fn unbounded_has_ray() {
        // min -x s.t. x - y <= 1
        let p = lp(&[-1.0, 0.0], &[&[1.0, -1.0]], &[1.0]);
        let out = solve(&p, 100);
        assert_eq!(out.status, LpStatus::Unbounded);
        let d = out.ray.unwrap();
        assert!(d.iter().all(|v| v.to_f64() >= 0.0));
        assert!(dot(&p.objective, &d).to_f64() < 0.0);
        assert!(dot(&p.rows[0], &d).to_f64() <= 0.0);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let p = lp(
            &[-3.0, -5.0],
            &[&[1.0, 0.0], &[0.0, 2.0], &[3.0, 2.0]],
            &[4.0, 12.0, 18.0],
        );
        assert_eq!(solve(&p, 0).status, LpStatus::IterLimit);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the largest-coefficient rule.
        let p = lp(
            &[-0.75, 150.0, -0.02, 6.0],
            &[
                &[0.25, -60.0, -0.04, 9.0],
                &[0.5, -90.0, -0.02, 3.0],
                &[0.0, 0.0, 1.0, 0.0],
            ],
            &[0.0, 0.0, 1.0],
        );
        let out = solve(&p, 1000);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.primal_objective(&p).to_f64() + 0.05).abs() < 1e-20);
    }
}
