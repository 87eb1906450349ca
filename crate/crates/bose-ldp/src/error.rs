use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A series or integral that has no finite value at the given input.
    #[error("divergent: {0}")]
    Divergence(String),
    /// Derivative requested at a point where it blows up.
    #[error("singular: {0}")]
    Singular(String),
    /// Parameters outside the regime a solver is proven to cover.
    #[error("regime error: {0}")]
    Regime(String),
    /// A bracketed search found no admissible solution.
    #[error("no solution: {0}")]
    NoSolution(String),
    /// Exact enumeration would exceed the configured state-space bound.
    #[error("state space too large: {0}")]
    StateSpace(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
