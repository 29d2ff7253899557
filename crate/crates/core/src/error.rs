use thiserror::Error;

/// Errors raised by the lattice Bose gas computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode index {index} out of range for a lattice of {sites} sites")]
    Index { index: usize, sites: usize },

    #[error("invalid partition: subsystem of {subsystem} sites in a lattice of {sites} sites")]
    Partition { subsystem: usize, sites: usize },

    #[error("no convergence after {iterations} iterations (last estimate {estimate:e})")]
    Convergence { iterations: usize, estimate: f64 },

    #[error("unsupported branch: {0}")]
    Unsupported(String),

    #[error("divergent: {0}")]
    Divergent(String),

    #[error("tail mass {tail:e} exceeds {limit:e}; raise the cutoff")]
    TailMass { tail: f64, limit: f64 },

    #[error("eigenvalue {0:e} below the clipping threshold; correlation matrix is not positive")]
    Positivity(f64),

    #[error("ambiguous regime: {0}")]
    Classification(String),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Short machine-readable tag, stable across releases.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Index { .. } => "index",
            Error::Partition { .. } => "partition",
            Error::Convergence { .. } => "convergence",
            Error::Unsupported(_) => "unsupported",
            Error::Divergent(_) => "divergent",
            Error::TailMass { .. } => "tail-mass",
            Error::Positivity(_) => "positivity",
            Error::Classification(_) => "classification",
            Error::InsufficientData { .. } => "insufficient-data",
        }
    }
}
