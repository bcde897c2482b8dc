use crate::audit::{chain_audit, AuditFunction, AuditOptions, SaturationReport};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

use super::certificate::{LPProblem, LPSolution};
use super::simplex::LpStatus;

/// Recomputes the per-shell slacks of an optimal solution on `lattice`,
/// independently of the solver, and cross-checks the solver's numbers.
///
/// `cross_checks` records `|eps_audit - eps_lp|` and
/// `|objective_audit - objective_lp|`.
pub fn verify_solution(
    problem: &LPProblem,
    solution: &LPSolution,
    lattice: &Lattice,
) -> Result<SaturationReport> {
    verify_solution_with(problem, solution, lattice, &AuditOptions::default())
}

pub fn verify_solution_with(
    problem: &LPProblem,
    solution: &LPSolution,
    lattice: &Lattice,
    options: &AuditOptions,
) -> Result<SaturationReport> {
    if solution.status != LpStatus::Optimal {
        return Err(Error::InvalidParameter(format!(
            "only optimal solutions can be verified, got {:?}",
            solution.status
        )));
    }
    let h = AuditFunction::Combo(solution.combo(problem)?);
    let mut report = chain_audit(&h, lattice, None, problem.t, options)?;
    report.cross_checks.insert(
        "lp_epsilon".into(),
        (report.epsilon - solution.epsilon).abs(),
    );
    report.cross_checks.insert(
        "lp_objective".into(),
        (report.objective - solution.objective).abs(),
    );
    Ok(report)
}
