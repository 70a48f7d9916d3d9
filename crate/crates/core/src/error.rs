use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the model, the integrators and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("superposition must contain at least one component")]
    EmptySuperposition,

    #[error("component {index}: {reason}")]
    InvalidComponent { index: usize, reason: String },

    #[error("corrupted state: m_e^2 - |P|^2 = {radicand:e} is negative beyond roundoff (m_e = {effective_mass:e})")]
    CorruptedState { radicand: f64, effective_mass: f64 },

    #[error("apportionment step rejected: component {index} magnitude {magnitude:e} fell below {floor:e}")]
    StepRejected { index: usize, magnitude: f64, floor: f64 },

    #[error("superposition is massless (m0 = {rest_mass:e}); it has no rest frame to boost from")]
    Massless { rest_mass: f64 },

    #[error("speed {speed} outside the supported range [0, {limit}]")]
    SpeedOutOfRange { speed: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "boost did not converge after {steps} steps: |V - V_target| = {velocity_error:e}, \
         rest-mass drift = {rest_mass_drift:e}, |P - gamma m0 V| = {momentum_residual:e}"
    )]
    BoostNonConvergence {
        steps: usize,
        velocity_error: f64,
        rest_mass_drift: f64,
        momentum_residual: f64,
    },

    #[error("dipole fit is rank deficient: {0}")]
    RankDeficient(String),

    #[error("null-dipole frame not reached after {iterations} iterations (dipole ratio {ratio:e})")]
    FrameNotFound { iterations: usize, ratio: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of a numerical procedure to converge, as opposed to
    /// invalid input.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            Error::BoostNonConvergence { .. } | Error::FrameNotFound { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
