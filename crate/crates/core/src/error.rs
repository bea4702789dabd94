use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("group closure: {0}")]
    GroupClosure(String),
    #[error("coupled field is not equivariant: residual {residual:.3e} under {element}")]
    NotEquivariant { element: String, residual: f64 },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("singular denominator: {0}")]
    Singular(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. } | Error::NonFinite(_) | Error::Singular(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
