use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no unique steady state: {0}")]
    NoUniqueSteadyState(String),

    #[error("time step too large: {0}")]
    StepTooLarge(String),

    #[error("singular denominator in {0}")]
    Singularity(&'static str),

    #[error("coherence Im(rho21) = {0:e} describes a gain medium")]
    InvalidCoherence(f64),

    #[error("no splitting found: {0}")]
    NoSplitting(String),

    #[error("demodulation infeasible: {0}")]
    DemodulationInfeasible(String),

    #[error("at delta_c = {delta_c:e} rad/s: {source}")]
    AtDetuning {
        delta_c: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("config validation error at `{path}`: {reason}")]
    ConfigValidation { path: String, reason: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Validation,
    Numerical,
    Io,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_detuning(self, delta_c: f64) -> Self {
        Error::AtDetuning {
            delta_c,
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Usage(_) => ErrorClass::Usage,
            Error::InvalidParameter { .. } | Error::ConfigParse(_) | Error::ConfigValidation { .. } => {
                ErrorClass::Validation
            }
            Error::NoUniqueSteadyState(_)
            | Error::StepTooLarge(_)
            | Error::Singularity(_)
            | Error::InvalidCoherence(_)
            | Error::NoSplitting(_)
            | Error::DemodulationInfeasible(_) => ErrorClass::Numerical,
            Error::AtDetuning { source, .. } => source.class(),
            Error::Io { .. } => ErrorClass::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
