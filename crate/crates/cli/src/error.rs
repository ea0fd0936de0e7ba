use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 2 for anything the user can fix in the config or its paths, 3 for numerics.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<qstruct_core::Error> for CliError {
    fn from(e: qstruct_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
