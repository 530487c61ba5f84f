//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the numerical machinery.
///
/// Variants split into two broad families: contract violations on inputs
/// (bad parameters, points outside a domain) and numerical failures that
/// arise at run time (timeouts, non-convergence, step-size underflow).
/// [`Error::is_numerical`] distinguishes the two for exit-code purposes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {0} is outside the map domain or at the singular point")]
    SingularPoint(f64),

    #[error("origin spectrum is not of saddle type: {0}")]
    NonSaddleSpectrum(String),

    #[error("expanding condition violated: {0}")]
    ExpansionFailure(String),

    #[error("step size underflow at t = {t}: local error cannot be met")]
    StepSizeUnderflow { t: f64 },

    #[error("maximum step count {0} exceeded during integration")]
    MaxStepsExceeded(usize),

    #[error("no section crossing within time cap {time_cap} (orbit may be near the stable manifold)")]
    CrossingTimeout { time_cap: f64 },

    #[error("iteration did not converge within {0} steps")]
    NonConvergence(usize),

    #[error("root bracketing failed: {0}")]
    RootBracketing(String),

    #[error("orbit reached the singular set: {0}")]
    SingularOrbit(String),

    #[error("identification budget exceeded ({0} roof crossings)")]
    BudgetExceeded(u64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("extraction failure: {0}")]
    ExtractionFailure(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad
    /// inputs or configuration). The CLI maps these to exit code 3.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepSizeUnderflow { .. }
                | Error::MaxStepsExceeded(_)
                | Error::CrossingTimeout { .. }
                | Error::NonConvergence(_)
                | Error::RootBracketing(_)
                | Error::SingularOrbit(_)
                | Error::BudgetExceeded(_)
                | Error::ExtractionFailure(_)
                | Error::ModelMismatch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
