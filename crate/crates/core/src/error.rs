use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },

    #[error("vector norm is below the zero threshold")]
    ZeroVector,

    #[error("no sign change on [{lo}, {hi}] after bracket expansion")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("interference-plus-noise covariance is singular")]
    SingularCovariance,

    #[error("steering vector G s (or G^H w) vanishes")]
    ZeroSteering,

    #[error("waveform Hessian is singular; use root mode for the power multiplier")]
    SingularHessian,

    #[error("power budget {power} is below the Capon minimum {minimum}")]
    Infeasible { power: f64, minimum: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("waveform has zero norm")]
    ZeroWaveform,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at_iteration(iteration: usize, source: Error) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(source),
        }
    }

    /// Strips iteration context.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root_cause(),
            other => other,
        }
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self.root_cause(),
            Error::Parse(_) | Error::Validation { .. } | Error::Dimension(_)
        )
    }
}
