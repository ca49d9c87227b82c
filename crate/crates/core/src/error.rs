use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dense size {required} exceeds cap {cap} ({what})")]
    Size {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("iteration diverged at step {iteration}")]
    Diverged {
        iteration: usize,
        /// Last finite trace, when the caller produced one.
        trace: Option<Box<crate::estimation::SteepestDescentTrace>>,
    },

    #[error("step bound undefined: {0}")]
    UndefinedBound(String),

    #[error("config {path}:{line}: {msg}")]
    Config { path: String, line: usize, msg: String },

    #[error("kernel file {path}: {msg}")]
    KernelFile { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
