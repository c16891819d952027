use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("malformed unit lower triangular matrix: {0}")]
    MalformedTriangular(String),
    #[error("nonzero imaginary part {value} at entry ({row}, {col})")]
    ImaginaryResidue { row: usize, col: usize, value: String },
    #[error("operation unavailable in this mode: {0}")]
    ModeError(String),
    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("cannot parse token {token:?} at position {position}")]
    Parse { position: usize, token: String },
    #[error("spectrum is empty")]
    Empty,
    #[error("spectrum is not closed under conjugation: {value} has no partner")]
    ConjugateClosure { value: String },
    #[error("no Perron eigenvalue: {0}")]
    NoPerron(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RealizeError {
    #[error("spectrum shape not handled by this construction: {0}")]
    WrongShape(String),
    #[error("infeasible alphas: {0}")]
    InfeasibleAlphas(String),
    #[error("infeasible diagonal at entry {index}: {reason}")]
    InfeasibleDiagonal { index: usize, reason: String },
    #[error("no cut index absorbs the negative mass: {0}")]
    InfeasibleCut(String),
    #[error("empty interval for {param}: {reason}")]
    InfeasibleBeta { param: String, reason: String },
    #[error("empty feasibility interval for {param}: {reason}")]
    EmptyInterval { param: String, reason: String },
    #[error("method inapplicable: {reason}")]
    MethodInapplicable { reason: String, stuck_index: Option<usize> },
    #[error("index collision in construction layout: {0}")]
    ShapeConflict(String),
    #[error("unknown or invalid parameter override {0:?}")]
    UnknownParameter(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

impl RealizeError {
    /// Errors caused by the caller's input rather than by the construction.
    pub fn is_input_error(&self) -> bool {
        matches!(self, RealizeError::UnknownParameter(_))
    }
}
