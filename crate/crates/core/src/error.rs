use core::fmt;

use alloc::string::String;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the admissible range.
    InvalidParameter(String),
    /// A point is outside the domain of the map or function.
    OutOfDomain(String),
    /// Two successive quadrature refinements disagree beyond the target.
    NonConvergent { value: f64, error: f64, target: f64 },
    /// The declared decay of an integrand is too weak for absolute convergence.
    BadDecay { decay: Option<f64>, required: f64 },
    /// The operation is not available for this combination of inputs.
    Unsupported(String),
    /// An input failed an admissibility spot check.
    Inadmissible(String),
    /// Independent calibrations of the same constant disagree.
    InconsistentCalibration { spread: f64, tolerance: f64 },
    /// An iterative search left its monotonicity guard.
    Diverged(String),
    /// The work requested exceeds a cost guard.
    TooLarge { requested: usize, limit: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::OutOfDomain(msg) => write!(f, "point outside domain: {msg}"),
            Error::NonConvergent { value, error, target } => write!(
                f,
                "quadrature did not converge: value {value:e}, refinement difference {error:e}, target {target:e}"
            ),
            Error::BadDecay { decay, required } => match decay {
                Some(d) => write!(f, "decay exponent {d} must exceed {required}"),
                None => write!(f, "no decay exponent declared; need one above {required}"),
            },
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::Inadmissible(msg) => write!(f, "inadmissible input: {msg}"),
            Error::InconsistentCalibration { spread, tolerance } => {
                write!(f, "calibration spread {spread:e} exceeds tolerance {tolerance:e}")
            }
            Error::Diverged(msg) => write!(f, "search diverged: {msg}"),
            Error::TooLarge { requested, limit } => {
                write!(f, "problem size {requested} exceeds limit {limit}")
            }
        }
    }
}

impl core::error::Error for Error {}

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidParameter(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
