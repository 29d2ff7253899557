use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] bose_mi::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Error::Core(e) => e.tag(),
            Error::Usage(_) => "usage",
            Error::Input(_) => "input",
            Error::Io { .. } => "io",
        }
    }

    /// Process exit status: 2 for bad input, 3 for too little data to fit,
    /// 4 for numerical non-convergence, 1 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(bose_mi::Error::InsufficientData { .. }) => 3,
            Error::Core(bose_mi::Error::Convergence { .. }) => 4,
            Error::Core(_) | Error::Usage(_) | Error::Input(_) => 2,
            Error::Io { .. } => 1,
        }
    }
}
