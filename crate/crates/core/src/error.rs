use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition on the inputs was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A size guard was exceeded or a size computation overflowed.
    #[error("size error: {what} (requested {requested}, limit {limit})")]
    Size {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    /// An iterative solver did not reach its tolerance.
    #[error("{solver} did not converge after {iterations} iterations (best residual {residual:e})")]
    Convergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        /// Best residual norms per requested quantity, where meaningful.
        best_residuals: Vec<f64>,
    },

    /// The LDLᵀ factorization broke down even after shift jitter.
    #[error("factorization breakdown at shift {shift}: {reason}")]
    Factorization { shift: f64, reason: String },

    /// A counting threshold coincides with an eigenvalue of a cell problem.
    #[error("threshold degeneracy: |pi^2 |k|^2 + v + eps| = {gap:e} for v = {v}, eps = {eps}; perturb eps")]
    ThresholdDegeneracy { v: f64, eps: f64, gap: f64 },

    /// Too few shells to fit a decay rate.
    #[error("insufficient fit range: {usable} usable shells, need at least {needed}")]
    InsufficientRange { usable: usize, needed: usize },

    /// Every realization was rejected by the conditioning event.
    #[error("conditioning error: all {trials} realizations fell outside the conditioning event")]
    Conditioning { trials: usize },

    /// Invalid configuration or command-line input.
    #[error("config error: {0}")]
    Config(String),

    /// A persisted table does not match its schema.
    #[error("schema error in {file}: row {row}, column {column}: {reason}")]
    Schema {
        file: String,
        row: usize,
        column: String,
        reason: String,
    },

    /// Persisted files are missing, or their content hash does not match.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_computational(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. }
                | Error::Factorization { .. }
                | Error::Conditioning { .. }
                | Error::InsufficientRange { .. }
                | Error::Schema { .. }
                | Error::Integrity(_)
                | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
