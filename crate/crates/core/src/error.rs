use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is singular (pivot {pivot_index})")]
    Singular { pivot_index: usize },

    #[error("non-finite value produced by {context}")]
    NonFinite { context: &'static str },

    #[error("argument kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("continued fraction tail is singular at storey {level}")]
    TailSingular { level: usize },

    #[error("level {level} out of range (0..={max})")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("level {level} is singular{}", node.map(|n| format!(" at node {n}")).unwrap_or_default())]
    LevelSingular { level: usize, node: Option<usize> },

    #[error("nodes {first} and {second} coincide")]
    DuplicateNodes { first: usize, second: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("quadrature failed at tau = {tau}: {source}")]
    QuadratureFailure { tau: f64, source: Box<Error> },

    #[error("reciprocal difference breakdown at order {order}")]
    Breakdown { order: usize },

    #[error("parse error at position {position}: expected {expected}")]
    Parse { position: usize, expected: String },

    #[error("unknown identifier `{name}`")]
    UnknownIdentifier { name: String },

    #[error("domain error in {op} with operands {operands:?}")]
    Domain { op: &'static str, operands: Vec<f64> },

    #[error("unbound variable `{name}`")]
    UnboundVariable { name: String },

    #[error("entry ({row}, {col}): {source}")]
    Entry {
        row: usize,
        col: usize,
        source: Box<Error>,
    },

    #[error("grid size mismatch: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("parameter {name} = {value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
}

impl Error {
    /// True for failures caused by a required inverse not existing.
    pub fn is_breakdown(&self) -> bool {
        match self {
            Error::Singular { .. }
            | Error::TailSingular { .. }
            | Error::LevelSingular { .. }
            | Error::Breakdown { .. }
            | Error::NonFinite { .. } => true,
            Error::QuadratureFailure { source, .. } | Error::Entry { source, .. } => {
                source.is_breakdown()
            }
            _ => false,
        }
    }
}
