use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("problem too large for exhaustive check: {what} = {value} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("quadrature failed to reach tolerance {tol:e} (estimated error {err:e})")]
    QuadratureFailure { tol: f64, err: f64 },

    #[error("root bracket failure in {what}: {detail}")]
    RootBracketFailure { what: &'static str, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("lp solver failure: {0}")]
    Solver(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("manifest error: {0}")]
    Manifest(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
