use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config error at `{field}` (line {line}, column {column}): {message}")]
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("unknown format `{0}` (expected csv, json or svg)")]
    UnknownFormat(String),
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
    #[error("nothing to plot: {0}")]
    Empty(&'static str),
    #[error(transparent)]
    Model(#[from] demonlab_core::Error),
    #[error(transparent)]
    MonteCarlo(#[from] demonlab_mc::McError),
}

impl HarnessError {
    /// 2 for anything the user can fix in the config or arguments, else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Model(_) | HarnessError::MonteCarlo(_) => 1,
            _ => 2,
        }
    }
}
