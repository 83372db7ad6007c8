use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse {
        line: Option<usize>,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("bad override: {0}")]
    Override(String),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("cannot analyze: {0}")]
    Analyze(String),
    #[error(transparent)]
    Core(#[from] riot_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    TomlOut(#[from] toml::ser::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;
