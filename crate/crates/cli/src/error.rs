use std::path::Path;

use miv_cellkit::Error as CoreError;
use serde::Serialize;
use thiserror::Error;

/// Stable machine-readable failure classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorCode {
    /// Bad command line.
    #[serde(rename = "E_USAGE")]
    Usage,
    /// Missing, unreadable or malformed input.
    #[serde(rename = "E_INPUT")]
    Input,
    #[serde(rename = "E_NUMERIC")]
    Numeric,
    #[serde(rename = "E_CONVERGENCE")]
    Convergence,
    #[serde(rename = "E_EXTRACTION")]
    Extraction,
    #[serde(rename = "E_MEASURE")]
    Measure,
    /// An output file could not be written.
    #[serde(rename = "E_OUTPUT")]
    Output,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Usage => "E_USAGE",
            ErrorCode::Input => "E_INPUT",
            ErrorCode::Numeric => "E_NUMERIC",
            ErrorCode::Convergence => "E_CONVERGENCE",
            ErrorCode::Extraction => "E_EXTRACTION",
            ErrorCode::Measure => "E_MEASURE",
            ErrorCode::Output => "E_OUTPUT",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCode::Usage | ErrorCode::Input => 2,
            ErrorCode::Numeric | ErrorCode::Convergence => 3,
            ErrorCode::Extraction => 4,
            ErrorCode::Measure => 5,
            ErrorCode::Output => 6,
        }
    }
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub code: ErrorCode,
    pub message: String,
}

impl CliError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Input, message)
    }

    pub fn output(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Self::new(ErrorCode::Output, format!("{}: {err}", path.display()))
    }

    /// `{"error":{"code":...,"message":...}}` on one line.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            code: &'a str,
            message: &'a str,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Body<'a>,
        }
        serde_json::to_string(&Wrapper {
            error: Body {
                code: self.code.as_str(),
                message: &self.message,
            },
        })
        .expect("error JSON")
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::Domain { .. }
            | CoreError::Parameter { .. }
            | CoreError::Parse { .. }
            | CoreError::UnknownName { .. }
            | CoreError::Precondition(_)
            | CoreError::Io { .. }
            | CoreError::Json(_) => ErrorCode::Input,
            CoreError::Numeric(_) => ErrorCode::Numeric,
            CoreError::Convergence { .. } => ErrorCode::Convergence,
            CoreError::Extraction { .. } => ErrorCode::Extraction,
            CoreError::NoCrossing { .. } => ErrorCode::Measure,
        };
        CliError::new(code, e.to_string())
    }
}

pub(crate) fn read_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::input(format!("{}: {e}", path.display()))
}

pub type CliResult<T> = std::result::Result<T, CliError>;
