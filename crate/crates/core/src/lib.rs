//! Theta series, Poisson-summation certificates and saturation audits for
//! unimodular integral lattices.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: exact lattices, shell enumeration, integrality and
//!   unimodularity checks, four-square transport and random rotations.
//! * [`theta`]: Jacobi nullwerte, the Eisenstein series `E4`, theta series
//!   from shell counts and the identity suite.
//! * [`poisson`]: radial Gaussian combinations with closed-form transforms
//!   and Poisson-summation checks on self-dual lattices.
//! * [`lp`]: the shell-discretised certificate linear program and its
//!   dense simplex solver.
//! * [`audit`]: saturation chain, `E8` collapse, graded and sequence audits.
//!
//! Numerical work that has to resolve exact identities is carried out in
//! double-double arithmetic ([`dd::Dd`]).

pub mod audit;
pub mod dd;
pub mod error;
pub mod lattice;
pub mod lp;
pub mod poisson;
pub mod theta;

pub use error::{Error, Result};
