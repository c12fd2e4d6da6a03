//! Error type shared by all modules.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The dynamical matrix has complex eigenvalues, so the theory has no
    /// stable normal form. Carries the offending eigenvalues.
    #[error("unstable theory: dynamical matrix has complex eigenvalues {0:?}")]
    UnstableTheory(Vec<C64>),

    /// The dynamical matrix has real spectrum but no symplectic eigenbasis
    /// (zero or defective normal frequencies).
    #[error("degenerate normal form: {0}")]
    DegenerateNormalForm(String),

    /// Requested Fock space exceeds the configured dimension bound.
    #[error("dimension {dim} exceeds safety bound {bound}")]
    DimensionBound { dim: u128, bound: usize },

    /// Operation is not defined for the requested statistics or theory.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A propagator denominator vanished; the ratio is reported, not guessed.
    #[error("degenerate denominator: |{0}| below cutoff")]
    DegenerateDenominator(f64),

    /// Ratio against a zero-norm state.
    #[error("undefined ratio: zero-norm field configuration")]
    UndefinedRatio,

    /// Check name not present in the registry.
    #[error("unknown check: {0}")]
    UnknownCheck(String),

    /// A scan parameter path does not address a numeric config field.
    #[error("bad parameter path: {0}")]
    BadParamPath(String),

    /// Configuration could not be parsed.
    #[error("config error: {0}")]
    Config(String),

    #[error("linear algebra backend error: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
