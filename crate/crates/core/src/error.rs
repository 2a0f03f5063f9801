use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operator or state dimensions do not fit the layout they are used with.
    #[error("layout error: {0}")]
    Layout(String),

    /// Input violates a structural requirement (Hermiticity, POVM completeness, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Parameter outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The collective backend cannot represent the requested operation.
    #[error("representation error: {0}")]
    Representation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Layout(_) | Error::Validation(_) | Error::Domain(_) | Error::Config(_) => 2,
            Error::Representation(_) => 3,
            Error::Io(_) => 4,
        }
    }
}
