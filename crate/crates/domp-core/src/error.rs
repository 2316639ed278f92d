//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Failure modes of builders, oracles, and solvers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument violates a documented precondition.
    InvalidArgument(String),
    /// The operation exists but does not handle this input class.
    Unsupported(String),
    /// An enumeration guard was exceeded; the exact computation would not
    /// finish at desk scale.
    ResourceLimit(String),
    /// The input encodes a point outside the feasible set it claims to be in.
    InfeasibleInput(String),
    /// An iterative numerical kernel failed to converge.
    NumericFailure(String),
    /// Two objects built for different dimensions were combined.
    LayoutMismatch(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::ResourceLimit(msg) => write!(f, "resource limit: {msg}"),
            Error::InfeasibleInput(msg) => write!(f, "infeasible input: {msg}"),
            Error::NumericFailure(msg) => write!(f, "numeric failure: {msg}"),
            Error::LayoutMismatch(msg) => write!(f, "layout mismatch: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
