//! Engine error type.

use alloc::string::String;
use core::fmt;

/// Errors produced by the engine.
///
/// The variants partition failures the same way the CLI exit codes do:
/// configuration/shape/argument problems (exit 2), data problems (exit 3),
/// numeric failures (exit 4), and degenerate scouting (exit 5).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Invalid network or training configuration.
    Config(String),
    /// Mismatched matrix or parameter shapes.
    Shape(String),
    /// Invalid argument to an operation.
    Argument(String),
    /// A dataset is malformed or missing something the caller asked for.
    Data(String),
    /// A non-finite value appeared where the engine guarantees finiteness.
    Numeric(String),
    /// Scouting produced no usable deviations, so no guidance can be built.
    DegenerateScouting(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Shape(msg) => write!(f, "shape error: {msg}"),
            Error::Argument(msg) => write!(f, "argument error: {msg}"),
            Error::Data(msg) => write!(f, "data error: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric error: {msg}"),
            Error::DegenerateScouting(msg) => write!(f, "degenerate scouting: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
