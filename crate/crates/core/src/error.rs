use thiserror::Error;

/// Errors raised by the solvers, generators and tuning routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller violated an argument contract (bad axis, empty input, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// The minimum leaf size cannot be satisfied by any partition.
    #[error("infeasible configuration: gamma = {gamma} exceeds the {cells} cells of the lattice")]
    Infeasible { gamma: usize, cells: usize },

    /// Observations are malformed (wrong length, NaN, infinity).
    #[error("data error: {0}")]
    Data(String),

    /// A configuration value is out of range.
    #[error("configuration error: {0}")]
    Config(String),

    /// The requested method does not support this lattice.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Solver tables are inconsistent; indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
