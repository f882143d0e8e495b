use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported element pattern `{0}`")]
    UnsupportedPattern(String),

    #[error(
        "coupling matrix violates the physical model ({reason}): \
         eigenvalues in [{min_eigenvalue:.3e}, {max_eigenvalue:.12}]"
    )]
    ModelInconsistency {
        reason: &'static str,
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("R0*I + Z is singular")]
    SingularNetwork,

    #[error("impedance matrix is not passive: Hermitian part has eigenvalue {min_eigenvalue:.3e}")]
    NonPassiveImpedance { min_eigenvalue: f64 },

    #[error("coupling matrix has no approximate null space at this threshold (U = 0)")]
    NoNullSpace,

    #[error("normalized correlation {value} at ({row}, {col}) is outside [-1, 1]")]
    InvalidCovariance { row: usize, col: usize, value: f64 },

    #[error("rank-deficient channel: {0}")]
    RankDeficient(String),

    #[error("degenerate effective noise covariance: {0}")]
    DegenerateCovariance(String),

    #[error("degenerate radiated power: {0}")]
    DegenerateRadiation(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("too many failed realizations at M = {elements}: {failures} of {realizations}")]
    TooManyFailures {
        elements: usize,
        failures: usize,
        realizations: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("malformed CSV record {line}: {reason}")]
    MalformedRecord { line: u64, reason: String },
}
