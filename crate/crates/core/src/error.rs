use std::path::PathBuf;

use thiserror::Error;

use crate::dynamics::Trajectory;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("exact enumeration refused: {sites} sites exceeds the limit of {limit}")]
    OracleInfeasible { sites: usize, limit: usize },

    #[error("time step {dt:e} s violates the stability guard dt * omega/Q = {ratio:.3} > {limit}")]
    Unstable { dt: f64, ratio: f64, limit: f64 },

    #[error("non-finite {variable} on laser {laser} at t = {time:e} s")]
    NonFinite {
        time: f64,
        laser: usize,
        variable: &'static str,
    },

    /// Integration aborted part way; the samples recorded so far are kept.
    #[error("integration aborted: {source}")]
    Aborted {
        #[source]
        source: Box<Error>,
        partial: Box<Trajectory>,
    },

    #[error("detuning {detuning:e} rad/s lies outside the locking range +/-{half_width:e} rad/s")]
    Unlocked { detuning: f64, half_width: f64 },

    #[error("{aborted} of {trials} trials aborted (more than 10%)")]
    TooManyAborts { aborted: usize, trials: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonFinite { .. } | Error::TooManyAborts { .. } => true,
            Error::Aborted { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
