use std::fmt;

use tsc_core::Error;

/// Process exit status of a failed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Data = 2,
    Numeric = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: ExitKind,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { kind: ExitKind::Usage, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Failure { kind: ExitKind::Data, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::InvalidArgument(_) | Error::Unsupported(_) => ExitKind::Usage,
            Error::Numeric(_) => ExitKind::Numeric,
            Error::Shape(_)
            | Error::Data(_)
            | Error::Parse { .. }
            | Error::Format(_)
            | Error::Io { .. }
            | Error::Json(_)
            | Error::Csv(_) => ExitKind::Data,
        };
        Failure { kind, message: e.to_string() }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;
