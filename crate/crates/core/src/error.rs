use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("capacity exceeded: {qubits} qubits requested, cap is {cap}")]
    Capacity { qubits: usize, cap: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("zero reduction: all truncated weights vanish")]
    ZeroReduction,
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("malformed csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
