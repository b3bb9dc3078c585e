use std::fmt;

use thiserror::Error;

/// A single violated parameter bound, as reported by [`crate::model::validate_params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub value: f64,
    pub bound: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} violates {}", self.field, self.value, self.bound)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", format_violations(.0))]
    InvalidParams(Vec<Violation>),

    #[error("abscissa s = {0} lies outside [0, 1]")]
    AbscissaOutOfRange(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite dispersion coefficients at omega = {omega}")]
    NonFiniteCoefficients { omega: f64 },

    #[error("both k^4 branches vanish at omega = {omega}")]
    ZeroBranches { omega: f64 },

    #[error("element [{a}, {b}] is ill-conditioned at omega = {omega} (condition estimate {condition:.3e})")]
    ElementConditioning {
        a: f64,
        b: f64,
        omega: f64,
        condition: f64,
    },

    #[error("unmeasured block is singular at omega = {omega}")]
    SingularCondensation { omega: f64 },

    #[error("dynamic stiffness is singular at omega = {omega} (condition estimate {condition:.3e})")]
    SingularSystem { omega: f64, condition: f64 },

    #[error("no usable frequencies left in the functional")]
    EmptyFrequencySet,

    #[error("finite element mesh is not aligned with the damaged zone: {0}")]
    MisalignedMesh(String),

    #[error("eigenvalue solver failed: {0}")]
    EigenSolver(String),

    #[error("objective is not finite at a starting vertex")]
    NonFiniteStart,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures that come from the numerics rather than from user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteCoefficients { .. }
                | Error::ZeroBranches { .. }
                | Error::ElementConditioning { .. }
                | Error::SingularCondensation { .. }
                | Error::SingularSystem { .. }
                | Error::EmptyFrequencySet
                | Error::EigenSolver(_)
                | Error::NonFiniteStart
        )
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
