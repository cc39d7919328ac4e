use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Every variant belongs to exactly one [`ErrorFamily`], which decides the
/// process exit code of the command-line tool and the C status code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("grid size must be a power of two >= 8, got {0}")]
    NonPowerOfTwo(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot normalize: V_hat(0) vanishes")]
    CannotNormalize,
    #[error("unresolved potential: {0}")]
    UnresolvedPotential(String),
    #[error("singular mode: {0}")]
    SingularMode(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("sonic threshold |P| = 1 is excluded")]
    Sonic,
    #[error("unresolved oscillation: {0}")]
    UnresolvedOscillation(String),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("insufficient |x| range: {0}")]
    InsufficientRange(String),
    #[error("too few samples: need at least {needed}, have {have}")]
    TooFewSamples { needed: usize, have: usize },
    #[error("monitor violation: {0}")]
    MonitorViolation(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("version mismatch: {0}")]
    VersionMismatch(String),
    #[error("missing inputs: {0}")]
    MissingInputs(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error classes used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    Config,
    Numerical,
    Monitor,
    Io,
}

impl Error {
    pub fn family(&self) -> ErrorFamily {
        use Error::*;
        match self {
            InvalidDimension(_) | NonPowerOfTwo(_) | InvalidParameter(_) | CannotNormalize | GridMismatch | Sonic | Config(_) | VersionMismatch(_)
            | MissingInputs(_) => ErrorFamily::Config,
            UnresolvedPotential(_) | SingularMode(_) | UnresolvedOscillation(_) | QuadratureFailure(_) | InsufficientRange(_) | TooFewSamples { .. } => {
                ErrorFamily::Numerical
            }
            MonitorViolation(_) | NonFinite(_) => ErrorFamily::Monitor,
            Io(_) => ErrorFamily::Io,
        }
    }

    /// Process exit code: 2 config, 3 numerical resolution, 4 monitor, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.family() {
            ErrorFamily::Config => 2,
            ErrorFamily::Numerical => 3,
            ErrorFamily::Monitor => 4,
            ErrorFamily::Io => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
