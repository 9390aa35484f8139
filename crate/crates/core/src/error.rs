use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },

    #[error("grid step mismatch: {a} meV vs {b} meV (resample first)")]
    StepMismatch { a: f64, b: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("thermal occupation diverges at zero phonon energy for T = {temperature_k} K")]
    DivergentOccupation { temperature_k: f64 },

    #[error(
        "deconvolution did not converge after {iterations} iterations (L1 residual {residual:.3e})"
    )]
    NotConverged { iterations: usize, residual: f64 },

    #[error("series truncation i_max = {i_max} is below the required {required}")]
    TruncationTooLow { i_max: usize, required: usize },

    #[error("vibrational overlap vanishes at delta = {delta_mev} meV; rate ratio undefined")]
    UndefinedRatio { delta_mev: f64 },

    #[error("all decay rates are zero; lifetime is infinite")]
    InfiniteLifetime,

    #[error("delta = {delta_mev} meV is not interior to the overlap support")]
    OutsideSupport { delta_mev: f64 },

    #[error("{0}")]
    Unidentifiable(String),

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
