use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown lattice name `{0}`")]
    UnknownLattice(String),

    #[error("lattice is not integral: {0}")]
    NotIntegral(String),

    #[error("lattice `{0}` is not integral unimodular (self-dual)")]
    NotSelfDual(String),

    #[error("enumeration budget of {budget} work units exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("shell count overflowed at squared norm {0}")]
    CountOverflow(u64),

    #[error("shell data to norm {available} is insufficient; norm {required} is needed")]
    InsufficientShells { available: u64, required: u64 },

    #[error("test doubles are only accepted with `allow_test_doubles` set")]
    TestDoubleRejected,

    #[error("envelope is not summable: {0}")]
    EnvelopeNotSummable(String),

    #[error("linear program solve failed: {0}")]
    Solver(String),
}
