use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("invalid step size {0}")]
    InvalidStep(f64),
    #[error("inconsistent target: population {population} exceeds residual {residual}")]
    InconsistentTarget { population: f64, residual: f64 },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("circuit too wide: {width} qubits (limit {limit})")]
    TooWide { width: usize, limit: usize },
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("routing failed: {0}")]
    Routing(String),
    #[error("inconsistent options: {0}")]
    Options(String),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("invalid fidelity {0}")]
    InvalidFidelity(f64),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("all shots discarded")]
    AllDiscarded,
    #[error("mitigation: {0}")]
    Mitigation(String),
    #[error("mismatched inputs: {0}")]
    Mismatch(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("provenance check failed for {0}")]
    Provenance(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
