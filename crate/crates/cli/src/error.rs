use std::path::PathBuf;

/// Everything a subcommand can fail with. Each variant maps to one exit code
/// and one short machine-readable tag.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{0}")]
    ManifestMismatch(String),
    #[error(transparent)]
    Compute(#[from] wxindex_core::Error),
}

impl CliError {
    pub fn tag(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::ManifestMismatch(_) => "manifest",
            CliError::Compute(_) => "compute",
        }
    }

    /// Process exit code: 2 usage, 3 io, 4 parse, 5 manifest, 6 compute.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Parse { .. } => 4,
            CliError::ManifestMismatch(_) => 5,
            CliError::Compute(_) => 6,
        }
    }

    /// `error[<tag>]: <message>` with any line breaks flattened.
    pub fn one_line(&self) -> String {
        let msg = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error[{}]: {msg}", self.tag())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
