use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}:{column}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing prerequisite: {0}")]
    MissingPrerequisite(String),

    #[error("{what} failed to build\n{log}")]
    Build { what: String, log: String },

    #[error("could not run `{command}`: {source}")]
    Command {
        command: String,
        #[source]
        source: std::io::Error,
    },

    #[error("target declaration not found: {0}")]
    TargetNotFound(String),

    #[error("output directory already in use: {}", .0.display())]
    WriteConflict(PathBuf),

    #[error("{site}: {message}")]
    Literal { site: String, message: String },

    #[error("unknown framework adapter `{0}`")]
    UnknownAdapter(String),

    #[error("empty argument union for {0}")]
    EmptyUnion(String),

    #[error("cannot classify {put}: {message}")]
    Classify { put: String, message: String },

    #[error("{0}")]
    Encoding(String),

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownAdapter(_) => 2,
            Error::MissingPrerequisite(_) => 3,
            Error::Build { .. } | Error::Parse { .. } | Error::Literal { .. } => 4,
            Error::TargetNotFound(_) => 4,
            _ => 1,
        }
    }
}
