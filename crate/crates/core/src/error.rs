use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {coords:?} outside domain: {reason}")]
    DomainViolation { coords: Vec<f64>, reason: String },

    #[error("non-finite {what} at {coords:?}")]
    NonFinite { what: String, coords: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("newton iteration did not converge: relative residual {residual:e} after {iterations} iterations")]
    NewtonDivergence { residual: f64, iterations: usize },

    #[error("singular hessian (condition estimate {condition:e})")]
    SingularHessian { condition: f64 },

    #[error("function not strictly monotone in pivot variable {pivot}: derivative {derivative:e}")]
    MonotonicityViolation { pivot: usize, derivative: f64 },

    #[error("could not bracket target value {target:e} in pivot variable {pivot}")]
    BracketFailure { pivot: usize, target: f64 },

    #[error("pivot variable {pivot} is not strictly one-signed on the domain")]
    PivotSignViolation { pivot: usize },

    #[error("matrix asymmetry {asymmetry:e} exceeds tolerance")]
    AsymmetryTooLarge { asymmetry: f64 },

    #[error("sampler exhausted: {accepted} admissible of {attempts} attempts")]
    SamplerExhausted { accepted: usize, attempts: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("stage {stage} ({name}): {source}")]
    Stage {
        stage: usize,
        name: String,
        source: Box<Error>,
    },
}

impl Error {
    pub fn domain(coords: &[f64], reason: impl Into<String>) -> Self {
        Error::DomainViolation {
            coords: coords.to_vec(),
            reason: reason.into(),
        }
    }

    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures of the numerical machinery itself (solver
    /// divergence, singular systems), as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::NewtonDivergence { .. }
                | Error::SingularHessian { .. }
                | Error::BracketFailure { .. }
                | Error::NonFinite { .. }
        )
    }
}
