use std::fmt;
use std::path::Path;

use topogland::Error;

/// Process exit codes.
pub mod code {
    pub const FAILURE: u8 = 1;
    pub const UNREADABLE_INPUT: u8 = 2;
    pub const MALFORMED_INPUT: u8 = 3;
    pub const MISSING_PAIR: u8 = 4;
    pub const DIMENSION_MISMATCH: u8 = 5;
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    /// Failure while reading `path`, classified by the error kind.
    pub fn reading(path: &Path, err: Error) -> Self {
        let code = match &err {
            Error::Io { .. } => code::UNREADABLE_INPUT,
            Error::Image { .. } | Error::MalformedRaster { .. } | Error::NonFinite { .. } => {
                code::MALFORMED_INPUT
            }
            Error::DimensionMismatch { .. } => code::DIMENSION_MISMATCH,
            _ => code::FAILURE,
        };
        Self::new(code, format!("{}: {err}", path.display()))
    }

    pub fn writing(path: &Path, err: impl fmt::Display) -> Self {
        Self::new(code::FAILURE, format!("cannot write {}: {err}", path.display()))
    }

    pub fn mismatch(a: &Path, b: &Path, err: Error) -> Self {
        let code = match err {
            Error::DimensionMismatch { .. } => code::DIMENSION_MISMATCH,
            _ => code::FAILURE,
        };
        Self::new(code, format!("{} vs {}: {err}", a.display(), b.display()))
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::DimensionMismatch { .. } => code::DIMENSION_MISMATCH,
            _ => code::FAILURE,
        };
        Self::new(code, err.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;
