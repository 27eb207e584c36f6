use std::path::{Path, PathBuf};

use thiserror::Error;

/// Process exit codes. `0` is success and verify-pass.
pub mod exit {
    pub const VERIFY_FAIL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const MALFORMED_HEADER: i32 = 3;
    pub const VERSION_MISMATCH: i32 = 4;
    pub const TRUNCATED_BODY: i32 = 5;
    pub const TRAILING_BYTES: i32 = 6;
    pub const INVALID_RECORD: i32 = 7;
    pub const IO: i32 = 8;
    pub const INCOMPATIBLE: i32 = 9;
    pub const COMPUTATION: i32 = 10;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported format version {found}")]
    VersionMismatch { found: u64 },
    #[error("truncated body: expected {expected} bytes, found {found}")]
    TruncatedBody { expected: usize, found: usize },
    #[error("trailing bytes: expected {expected} body bytes, found {found}")]
    TrailingBytes { expected: usize, found: usize },
    #[error("record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("incompatible inputs: {0}")]
    Incompatible(String),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] bbmflow_core::Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MalformedHeader(_) => exit::MALFORMED_HEADER,
            CliError::VersionMismatch { .. } => exit::VERSION_MISMATCH,
            CliError::TruncatedBody { .. } => exit::TRUNCATED_BODY,
            CliError::TrailingBytes { .. } => exit::TRAILING_BYTES,
            CliError::InvalidRecord { .. } => exit::INVALID_RECORD,
            CliError::Io { .. } => exit::IO,
            CliError::Incompatible(_) => exit::INCOMPATIBLE,
            CliError::Usage(_) => exit::USAGE,
            CliError::Core(_) => exit::COMPUTATION,
        }
    }
}
