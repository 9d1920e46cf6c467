use thiserror::Error;

/// Errors raised by constructions, parsers and audits.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("width mismatch: expected {expected}, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("vertex {vertex} out of range 1..={m}")]
    VertexOutOfRange { vertex: u32, m: u32 },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("hypergraph is not {0}-uniform")]
    NotUniform(usize),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("enumeration needs {required}, above the cap of {cap} (raise {flag})")]
    CapExceeded {
        required: usize,
        cap: usize,
        flag: &'static str,
    },

    #[error("invalid cycle packing: {0}")]
    InvalidCyclePacking(String),

    #[error("no Hamiltonian decomposition found: {0}")]
    SearchFailed(String),

    #[error("not cycle-inducing: {0}")]
    NotCycleInducing(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("no key possible: communication rows span all {0} coordinates")]
    NoKeyPossible(usize),

    #[error("part {part} leaks outside its copy set: {reason}")]
    PartLeak { part: usize, reason: String },

    #[error("packing plan invalid: {0}")]
    InvalidPlan(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
