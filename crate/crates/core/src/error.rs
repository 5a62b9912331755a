use thiserror::Error;

use crate::solver::Allocation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (min eigenvalue {min_eig:e}, max {max_eig:e})")]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },

    #[error("dual point outside domain: A_{info_index} is not positive definite")]
    DualOutsideDomain { info_index: usize },

    #[error("BD infeasible for this user set: user {user} has an empty null space")]
    BdInfeasible { user: usize },

    #[error("BD dimension constraint violated: n_T = {n_t}, total receive antennas {n_r}, smallest terminal {min_rx}")]
    BdDimension { n_t: usize, n_r: usize, min_rx: usize },

    #[error("iteration budget exhausted after {iterations} iterations")]
    IterationBudget { iterations: usize, best: Option<Box<Allocation>> },

    #[error("projection did not converge within {iterations} iterations")]
    ProjectionNonConvergence { iterations: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O failure: {0}")]
    Io(String),
}
