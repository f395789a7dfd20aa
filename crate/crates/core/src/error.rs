use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("shape error in layer {layer}: {detail}")]
    Shape { layer: usize, detail: String },

    #[error("activation error in layer {layer}: {detail}")]
    Activation { layer: usize, detail: String },

    #[error("non-finite value in layer {layer}")]
    NonFinite { layer: usize },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("full translation needs {required_paths} paths ({required_nodes} nodes), budget is {budget}")]
    BudgetExceeded {
        required_paths: u128,
        required_nodes: u128,
        budget: u64,
    },

    #[error("trace mismatch: {0}")]
    TraceMismatch(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("program syntax error at {line}:{col}: {msg}")]
    Program { line: usize, col: usize, msg: String },

    #[error("θ shape mismatch: {0}")]
    ThetaShape(String),

    #[error("policy produced a non-finite action at state {state:?}")]
    NonFiniteAction { state: Vec<f64> },

    #[error("unknown environment `{0}`")]
    UnknownEnv(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
