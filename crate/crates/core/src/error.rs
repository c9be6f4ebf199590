use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("multiphoton resonance violated: omega31 - omega32 - omegaT = {mismatch:e} rad/s (relative {relative:e}, tolerance 1e-9)")]
    MultiphotonResonance { mismatch: f64, relative: f64 },

    #[error("domain error in {function}: {reason}")]
    Domain { function: &'static str, reason: String },

    #[error("steady state is not unique (smallest/largest pivot ratio {ratio:e})")]
    NonUniqueSteadyState { ratio: f64 },

    #[error("velocity node {index} (vz = {velocity:e} cm/s): {source}")]
    VelocityNode {
        index: usize,
        velocity: f64,
        #[source]
        source: Box<SimError>,
    },

    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("step limit of {max_steps} exceeded at t = {t:e}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("mode `{mode}` is incompatible with this scenario: {reason}")]
    IncompatibleMode { mode: String, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> SimError {
    SimError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn domain(function: &'static str, reason: impl Into<String>) -> SimError {
    SimError::Domain {
        function,
        reason: reason.into(),
    }
}
