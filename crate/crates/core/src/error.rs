use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate cell {0}")]
    DegenerateCell(usize),
    #[error("nonconforming mesh: {0}")]
    NonConforming(String),
    #[error("unsupported degree {0}")]
    UnsupportedDegree(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dependent basis in macro {macro_index}")]
    DependentBasis { macro_index: usize },
    #[error("U_M dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("element bubble dimension {found} differs from the reference value {expected}")]
    InconsistentBubbleDimension { expected: usize, found: usize },
    #[error("empty bubble basis")]
    EmptyBubbleBasis,
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("dof cap exceeded: {dofs} stress dofs > {cap}")]
    DofCap { dofs: usize, cap: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
