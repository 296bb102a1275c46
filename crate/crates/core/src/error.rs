//! Error type shared across the crate.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// A vector or matrix did not have the expected size. `location` names
    /// the offending layer or argument.
    DimensionMismatch {
        location: String,
        expected: usize,
        got: usize,
    },
    /// A configuration or argument value outside its domain.
    InvalidParameter(String),
    /// Response vector is all zeros; a Poisson log-link fit has no MLE.
    DegenerateResponse,
    /// The weighted normal matrix is singular (duplicated or linearly
    /// dependent features).
    CollinearFeatures,
    /// IRLS did not converge. `trace` holds max |delta beta| per iteration.
    NonConvergence { iterations: usize, trace: Vec<f64> },
    /// A loss or gradient became NaN/Inf during training.
    TrainingDiverged { epoch: usize, what: String },
    /// A statistical test cannot be computed on these samples.
    DegenerateSamples(String),
    /// An operation received no usable data.
    EmptyInput(String),
    /// A file could not be parsed. `line` is 1-based.
    Parse { line: usize, message: String },
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                location,
                expected,
                got,
            } => write!(f, "dimension mismatch at {location}: expected {expected}, got {got}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DegenerateResponse => write!(f, "all counts are zero; Poisson fit is degenerate"),
            Error::CollinearFeatures => write!(f, "collinear features: weighted normal matrix is singular"),
            Error::NonConvergence { iterations, trace } => write!(
                f,
                "IRLS did not converge after {iterations} iterations (last |dbeta| = {:?})",
                trace.last()
            ),
            Error::TrainingDiverged { epoch, what } => {
                write!(f, "training diverged at epoch {epoch}: {what}")
            }
            Error::DegenerateSamples(msg) => write!(f, "degenerate samples: {msg}"),
            Error::EmptyInput(msg) => write!(f, "empty input: {msg}"),
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
