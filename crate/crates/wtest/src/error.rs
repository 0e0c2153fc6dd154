use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{0}")]
    Format(String),

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Diagnostics(String),

    #[error(transparent)]
    Core(#[from] wtest_core::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code: 1 I/O, 2 format, 3 estimation, 64 usage.
    pub fn exit_code(&self) -> i32 {
        use wtest_core::Error as E;
        match self {
            Error::Io { .. } => 1,
            Error::Format(_) => 2,
            Error::Usage(_) => 64,
            Error::Diagnostics(_) => 3,
            Error::Core(e) => match e {
                E::Validation(_) | E::WrongOrder { .. } | E::MissingHf { .. } => 2,
                E::Domain(_) | E::MarkerOutOfRange { .. } | E::SameMarker(_) => 64,
                _ => 3,
            },
        }
    }
}
