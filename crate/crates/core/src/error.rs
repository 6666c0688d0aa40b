use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("invalid argument `{field}`: {msg}")]
    InvalidArgument { field: &'static str, msg: String },

    #[error("oracle refused: about {work:.3e} subsets to examine exceeds the 1e9 cap")]
    OracleTooLarge { work: f64 },

    #[error("setup cost differs across prefixes at search level {level}: {first} vs {other} rounds")]
    InhomogeneousSetup { level: usize, first: u64, other: u64 },

    #[error("checker cost differs across queries: {first} vs {other} rounds")]
    InhomogeneousCheck { first: u64, other: u64 },

    #[error("CONGEST network is disconnected: leader 0 cannot reach node {unreachable}")]
    Disconnected { unreachable: u32 },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field,
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
