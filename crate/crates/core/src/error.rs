use thiserror::Error;

/// Errors raised by the library. Every variant renders as a single line.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("range: {value} outside [{min}, {max}]")]
    Range { value: u64, min: u64, max: u64 },
    #[error("capacity: {0}")]
    Capacity(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("invariant: {0}")]
    Invariant(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Domain(_) => "domain",
            Error::Range { .. } => "range",
            Error::Capacity(_) => "capacity",
            Error::Overflow(_) => "overflow",
            Error::Precondition(_) => "precondition",
            Error::Invariant(_) => "invariant",
            Error::Io(_) => "io",
        }
    }

    /// Process exit status used by the command line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Domain(_)
            | Error::Range { .. }
            | Error::Precondition(_)
            | Error::Overflow(_) => 2,
            Error::Capacity(_) => 3,
            Error::Invariant(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
