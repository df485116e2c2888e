use thiserror::Error;

/// Errors from experiment configuration, execution, and reporting.
#[derive(Debug, Error)]
pub enum Error {
    /// A structurally valid config file with inadmissible contents.
    #[error("invalid config: {0}")]
    Config(String),

    /// A failure inside the filter, signal, or theory layer.
    #[error(transparent)]
    Core(#[from] ipmcc_core::Error),

    /// The config file could not be parsed; the message carries the
    /// offending line and column.
    #[error("cannot parse config: {0}")]
    ConfigSyntax(#[from] toml::de::Error),

    /// A file read or write failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
