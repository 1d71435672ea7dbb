use thiserror::Error;

/// Errors produced by the laboratory operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("empty coefficient or mode list")]
    EmptySpec,
    #[error("inconsistent |k|^2 across modes: {first} vs {other}")]
    InconsistentModes { first: i64, other: i64 },
    #[error("field has no eigenvalue")]
    MissingEigenvalue,
    #[error("point at radius {radius} lies outside the domain radius {domain}")]
    OutsideDomain { radius: f64, domain: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("spherical integral {value:e} is at the quadrature floor; the field vanishes on the sphere")]
    QuadratureFloor { value: f64 },
    #[error("low frequency: beta = {beta} does not exceed the gate {gate}")]
    LowFrequency { beta: f64, gate: f64 },
    #[error("sampling too coarse: gap {gap:e} exceeds the allowed {allowed:e}")]
    SamplingTooCoarse { gap: f64, allowed: f64 },
    #[error("budget exceeded: {requested} items requested, budget {budget}")]
    BudgetExceeded { requested: u128, budget: u128 },
    #[error("no valid k0 up to {k_max}; largest violating k = {largest_violation}")]
    NoValidK0 { k_max: u64, largest_violation: u64 },
    #[error("geometry below numerical resolution: {0}")]
    ResolutionInfeasible(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl LabError {
    /// Process exit code the CLI reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::BudgetExceeded { .. }
            | LabError::NoValidK0 { .. }
            | LabError::ResolutionInfeasible(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
