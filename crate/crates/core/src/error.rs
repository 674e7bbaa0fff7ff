use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid subsystem: {0}")]
    InvalidSubsystem(String),
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),
    #[error("state needs {needed} qubits, cap is {cap}")]
    QubitCap { needed: usize, cap: usize },
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of numerical preconditions, as opposed to I/O or
    /// serialization problems.
    pub fn is_numeric(&self) -> bool {
        !matches!(self, Error::Json(_) | Error::Csv(_) | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
