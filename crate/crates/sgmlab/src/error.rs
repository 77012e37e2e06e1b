use std::path::{Path, PathBuf};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// A replayed artifact differs from the recorded one.
    pub const MISMATCH: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const BLOW_UP: u8 = 3;
    pub const IO: u8 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Invalid configuration, with the offending field.
    #[error("{field}: {msg}")]
    Config { field: String, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A file exists but does not parse as the expected artifact.
    #[error("{path}: malformed {what}: {msg}")]
    Format {
        path: PathBuf,
        what: &'static str,
        msg: String,
    },
    #[error(transparent)]
    Core(#[from] sgm_core::Error),
    #[error("replay mismatch in {0}")]
    Mismatch(String),
}

impl LabError {
    pub fn config(field: impl Into<String>, msg: impl std::fmt::Display) -> Self {
        LabError::Config {
            field: field.into(),
            msg: msg.to_string(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, what: &'static str, msg: impl std::fmt::Display) -> Self {
        LabError::Format {
            path: path.to_path_buf(),
            what,
            msg: msg.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config { .. } => exit::CONFIG,
            LabError::Core(sgm_core::Error::BlowUpSuspected { .. }) => exit::BLOW_UP,
            LabError::Core(_) => exit::CONFIG,
            LabError::Io { .. } | LabError::Format { .. } => exit::IO,
            LabError::Mismatch(_) => exit::MISMATCH,
        }
    }
}

/// Tags a core validation error with the config section it came from.
pub(crate) fn in_field(field: &str) -> impl FnOnce(sgm_core::Error) -> LabError + '_ {
    move |e| LabError::config(field, e)
}

pub type Result<T> = std::result::Result<T, LabError>;
