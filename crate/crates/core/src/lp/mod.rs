//! Linear programming over Gaussian certificates.

mod certificate;
pub mod simplex;
mod verify;

pub use certificate::{
    build_lp, solve_lp, theta_zn, ConstraintRow, DictionarySpec, LPProblem, LPSolution, RowKind,
    ShellSlack, Witness, WitnessKind, DEFAULT_COEFF_BOUND, DEFAULT_DICTIONARY_SIZE,
    DEFAULT_LP_TOLERANCE, DEFAULT_MAX_PIVOTS, DEFAULT_SHELLS,
};
pub use simplex::LpStatus;
pub use verify::{verify_solution, verify_solution_with};
