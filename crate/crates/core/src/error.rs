use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error in {func}: {reason}")]
    Domain { func: &'static str, reason: String },

    /// A configuration value violates a model or parameter constraint.
    #[error("invalid configuration at `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// The configuration file could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// The time stepper gave up.
    #[error("solver failure at t = {t:e} (dt = {dt:e}): {reason}")]
    Solver { t: f64, dt: f64, reason: String },

    /// Reading or writing a file failed.
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        func,
        reason: reason.into(),
    }
}

pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        reason: reason.into(),
    }
}
