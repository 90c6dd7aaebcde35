use thiserror::Error;

use crate::laplacian::LaplacianKind;

/// Errors produced by graph construction, spectral operations, filtering,
/// Lanczos approximation and GCN training.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("node id {id} out of range for graph with {n} nodes")]
    IdOutOfRange { id: usize, n: usize },
    #[error("self-loop on node {0} rejected")]
    SelfLoopRejected(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({u}, {v}) has non-positive weight {w}")]
    NonpositiveWeight { u: usize, v: usize, w: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("signal is in the {found} domain, expected {expected}")]
    DomainMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("incidence matrix requires an unweighted graph")]
    WeightedGraphUnsupported,
    #[error("{0:?} Laplacian is not symmetric")]
    NonSymmetricKind(LaplacianKind),
    #[error("no convergence after {iterations} iterations: {context}")]
    ConvergenceFailure {
        context: &'static str,
        iterations: usize,
    },
    #[error("{given} coefficients exceed the limit of {max} for this graph")]
    TooManyCoefficients { given: usize, max: usize },
    #[error("lambda_max must be positive, got {0}")]
    NonpositiveLambdaMax(f64),
    #[error("linear solve failed: {0}")]
    SolveFailure(String),
    #[error("invalid filter spec: {0}")]
    InvalidFilter(String),
    #[error("starting vector is zero")]
    ZeroVector,
    #[error("bad dimensions: {0}")]
    BadDimensions(String),
    #[error("cache does not belong to the current model state")]
    StaleCache,
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("evaluation mask is empty")]
    EmptyMask,
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),
    #[error("connectivity failure: {0}")]
    ConnectivityFailure(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyGraph => "EmptyGraph",
            Error::IdOutOfRange { .. } => "IdOutOfRange",
            Error::SelfLoopRejected(_) => "SelfLoopRejected",
            Error::DuplicateEdge(..) => "DuplicateEdge",
            Error::NonpositiveWeight { .. } => "NonpositiveWeight",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::DomainMismatch { .. } => "DomainMismatch",
            Error::WeightedGraphUnsupported => "WeightedGraphUnsupported",
            Error::NonSymmetricKind(_) => "NonSymmetricKind",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::TooManyCoefficients { .. } => "TooManyCoefficients",
            Error::NonpositiveLambdaMax(_) => "NonpositiveLambdaMax",
            Error::SolveFailure(_) => "SolveFailure",
            Error::InvalidFilter(_) => "InvalidFilter",
            Error::ZeroVector => "ZeroVector",
            Error::BadDimensions(_) => "BadDimensions",
            Error::StaleCache => "StaleCache",
            Error::EmptyTrainSet => "EmptyTrainSet",
            Error::EmptyMask => "EmptyMask",
            Error::InvalidDataset(_) => "InvalidDataset",
            Error::DegenerateParameters(_) => "DegenerateParameters",
            Error::ConnectivityFailure(_) => "ConnectivityFailure",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
