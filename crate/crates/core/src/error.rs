use std::path::PathBuf;

/// Errors produced anywhere in the modeling pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length-extension singularity: eps_eff = {eps_eff} must exceed 0.258")]
    Singularity { eps_eff: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown line kind `{0}` (expected microstrip_impedance or patch_frequency)")]
    UnknownKind(String),

    #[error("empty range: {0}")]
    EmptyRange(String),

    #[error("degenerate {axis} range: min = max = {value}")]
    DegenerateRange { axis: &'static str, value: f64 },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("line {line}: schema error in column `{column}`: {message}")]
    Schema {
        line: u64,
        column: String,
        message: String,
    },

    #[error("line {line}: column `{column}` is not numeric: `{value}`")]
    NonNumeric {
        line: u64,
        column: String,
        value: String,
    },

    #[error("line {line}: x = {x} does not exceed previous x = {previous}")]
    NonMonotone { line: u64, x: f64, previous: f64 },

    #[error("insufficient data: need at least 2 distinct x values, found {distinct}")]
    InsufficientData { distinct: usize },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("model scaler has not been fitted")]
    UnfittedScaler,

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("model file version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: String, found: String },

    #[error("model file truncated: {0}")]
    Truncated(String),

    #[error("model dimension mismatch: {0}")]
    Dimension(String),

    #[error("malformed model file at line {line}: {message}")]
    MalformedModel { line: usize, message: String },

    #[error("percent error undefined for zero actual value")]
    ZeroActual,

    #[error("report has no rows")]
    EmptyReport,

    #[error("predictor failed at x = {x}")]
    Predictor {
        x: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("csv error in {path}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
