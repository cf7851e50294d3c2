use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },

    #[error("invalid configuration: {0}")]
    Constraint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("simulation already finished after {0} steps")]
    Finished(u64),

    #[error("experiment did not converge: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
