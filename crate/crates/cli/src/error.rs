use thermoconvex::Error;

/// Failures of a CLI run, each with a fixed exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Library(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Library(e) => match e.root() {
                Error::InvalidParameter(_) | Error::SamplerExhausted { .. } | Error::DimensionMismatch { .. } => {
                    EXIT_USAGE
                }
                _ => EXIT_NUMERICAL,
            },
            CliError::Io(_) => EXIT_USAGE,
        }
    }
}
