//! Oracle-free correctness estimation for sets of candidate programs.
//!
//! Candidates written in a small imperative language ([`lang`]) are grouped
//! into behavioural equivalence classes by bounded symbolic execution
//! ([`symexec`], [`cluster`]). Cluster-level uncertainty scores
//! ([`metrics`]) are then correlated with test-based correctness and turned
//! into abstention decisions ([`eval`]).
//!
//! The numeric layer is generic over [`num_traits::Float`]; the aliases
//! below fix it to `f64`, which is what the pipeline uses.

pub mod cluster;
pub mod eval;
pub mod int;
pub mod interp;
pub mod lang;
pub mod metrics;
pub mod symexec;

pub use int::Int;

/// Scalar used by the pipeline.
pub type Real = f64;
pub type Distribution = metrics::ResponseDistribution<Real>;
pub type Correlation = eval::CorrelationResult<Real>;
pub type Scored = eval::ScoredProblem<Real>;
pub type Labeled = eval::LabeledSample<Real>;
pub type Abstention = eval::AbstentionReport<Real>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Caller violated an operation's precondition.
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Load { path: String, message: String },
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
