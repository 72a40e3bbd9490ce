//! Error type shared by the whole crate.

use std::fmt;

/// Everything that can go wrong while building operators, solving, or
/// reading data files.
#[derive(Debug)]
pub enum Error {
    /// Scalar argument outside the mathematical domain (t ≤ 0, ω ≤ 0, …).
    Domain(String),
    /// Requested Hankel order beyond the supported stable range.
    OrderOverflow { order: i32, max: i32 },
    /// The mode matrix A_n is numerically singular.
    SingularMode { n: i32, det_modulus: f64 },
    /// A vector or grid has the wrong length.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// Invalid structural argument (non power-of-two grid, bad schedule, …).
    InvalidArgument(String),
    /// The linear solver failed or the solution residual is unacceptable.
    SolverFailure {
        omega: f64,
        snapshot: u64,
        detail: String,
    },
    /// Unknown preset or phantom name.
    UnknownName { kind: &'static str, name: String },
    /// Dataset container is malformed.
    DatasetFormat(String),
    /// Dataset does not cover the requested schedule.
    ScheduleMismatch(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::OrderOverflow { order, max } => {
                write!(f, "order {order} exceeds supported maximum {max}")
            }
            Error::SingularMode { n, det_modulus } => {
                write!(f, "mode matrix A_{n} is singular (|det| = {det_modulus:.3e})")
            }
            Error::DimensionMismatch {
                what,
                expected,
                got,
            } => write!(f, "{what}: expected length {expected}, got {got}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::SolverFailure {
                omega,
                snapshot,
                detail,
            } => write!(
                f,
                "linear solve failed at omega = {omega} (material snapshot {snapshot:#x}): {detail}"
            ),
            Error::UnknownName { kind, name } => write!(f, "unknown {kind} `{name}`"),
            Error::DatasetFormat(msg) => write!(f, "bad dataset file: {msg}"),
            Error::ScheduleMismatch(msg) => write!(f, "schedule mismatch: {msg}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
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
