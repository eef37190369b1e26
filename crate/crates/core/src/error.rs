use thiserror::Error;

/// Errors produced by the estimation and simulation routines.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no evaluation column belongs to class {0}")]
    EmptyClass(u32),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
