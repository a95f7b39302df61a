use std::fmt;
use std::path::Path;

use conduit_core::IngestError;

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Well-formed input that the analysis cannot use. Exit code 1.
    Domain(String),
    /// Unreadable, unwritable or unparsable input. Exit code 2.
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Input(format!("{}: {err}", path.display()))
    }

    /// Validation rejections are domain errors; everything else about a file is a parse error.
    pub fn ingest(path: &Path, err: IngestError) -> Self {
        match err {
            IngestError::Rejected(report) => CliError::Domain(format!("{}: {report}", path.display())),
            other => CliError::Input(format!("{}: {other}", path.display())),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(m) | CliError::Input(m) => f.write_str(m),
        }
    }
}

impl From<conduit_core::export::ExportError> for CliError {
    fn from(e: conduit_core::export::ExportError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
