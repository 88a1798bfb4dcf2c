use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbfError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite input value")]
    NonFiniteInput,

    #[error("state is not real-representable (relative imaginary residue {residue:e})")]
    NotRealRepresentable { residue: f64 },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("negative propagation time {0}")]
    NegativeDuration(f64),

    #[error("non-finite state encountered")]
    NonFiniteState,

    #[error("blow-up at step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown test function `{0}`")]
    InvalidTestFunction(String),

    #[error("logistic solution is singular at t = {0}")]
    SingularSolution(f64),

    #[error("error value at index {index} is not positive ({value})")]
    NonPositiveError { index: usize, value: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("file format error: {0}")]
    FileFormat(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{0} oracle check(s) failed")]
    OracleFailed(usize),

    #[error("study point {axis_value} failed: {source}")]
    StudyPoint {
        axis_value: usize,
        source: Box<KbfError>,
    },
}

impl From<std::io::Error> for KbfError {
    fn from(err: std::io::Error) -> Self {
        KbfError::Io(err.to_string())
    }
}

impl KbfError {
    /// Failures of the computation itself, as opposed to bad input.
    pub fn is_runtime(&self) -> bool {
        match self {
            KbfError::BlowUp { .. }
            | KbfError::NonFiniteState
            | KbfError::SingularSolution(_)
            | KbfError::Io(_)
            | KbfError::OracleFailed(_) => true,
            KbfError::StudyPoint { source, .. } => source.is_runtime(),
            _ => false,
        }
    }

    /// Short stable identifier used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            KbfError::InvalidGrid(_) => "InvalidGrid",
            KbfError::DimensionMismatch { .. } => "DimensionMismatch",
            KbfError::NonFiniteInput => "NonFiniteInput",
            KbfError::NotRealRepresentable { .. } => "NotRealRepresentable",
            KbfError::GridMismatch => "GridMismatch",
            KbfError::NegativeDuration(_) => "NegativeDuration",
            KbfError::NonFiniteState => "NonFiniteState",
            KbfError::BlowUp { .. } => "BlowUp",
            KbfError::Config(_) => "ConfigError",
            KbfError::InvalidTestFunction(_) => "InvalidTestFunction",
            KbfError::SingularSolution(_) => "SingularSolution",
            KbfError::NonPositiveError { .. } => "NonPositiveError",
            KbfError::Parse { .. } => "ParseError",
            KbfError::Validation { .. } => "ValidationError",
            KbfError::FileFormat(_) => "FileFormatError",
            KbfError::Io(_) => "IoError",
            KbfError::OracleFailed(_) => "OracleFailed",
            KbfError::StudyPoint { source, .. } => source.kind(),
        }
    }
}

pub type Result<T> = std::result::Result<T, KbfError>;
