use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("eigensolver did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("within-class scatter is singular even after regularization")]
    SingularWithinScatter,
    #[error("between-class scatter is singular even after regularization")]
    SingularBetweenScatter,
    #[error("requested dimension {requested} exceeds the {available} available nonzero directions")]
    DimensionTooLarge { requested: usize, available: usize },
    #[error("all between-class projections are zero")]
    DegenerateDenominator,
    #[error("every within-class residual exceeds epsilon; no sample left to fit")]
    AllSamplesCapped,
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("every fold failed for this parameter setting: {0}")]
    GridPointFailed(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
