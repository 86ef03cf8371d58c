use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular circuit: {0}")]
    SingularCircuit(String),

    #[error("current above depairing limit: j_norm^2 = {j_norm_sq} exceeds 4/27")]
    AboveDepairing { j_norm_sq: f64 },

    #[error(
        "quantization condition violated: integral of F is {quanta} quanta \
         (residual {residual:e} >= tolerance {tol:e})"
    )]
    QuantizationViolation { quanta: f64, residual: f64, tol: f64 },

    #[error("inconsistent mass profile: M(t_i) = {at_start} but M0 = {m0}")]
    InconsistentMass { at_start: f64, m0: f64 },

    #[error("configuration error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("step size too large: omega_max * dt = {omega_dt} exceeds {limit}")]
    StepSize { omega_dt: f64, limit: f64 },

    #[error("vacuum initialization failed: {0}")]
    Initialization(String),

    #[error("integration failure: Wronskian drift {drift:e} exceeds {limit:e}")]
    IntegrationFailure { drift: f64, limit: f64 },

    #[error("incomplete mode grid: expected {expected} k_x slots, found {found}")]
    IncompleteGrid { expected: usize, found: usize },

    #[error("time series gap of {gap} at t = {at} exceeds twice the sample spacing {spacing}")]
    SeriesGap { gap: f64, at: f64, spacing: f64 },

    #[error(
        "transport did not converge after {halvings} halvings \
         (last dt = {dt:e}, relative change {rel_change:e}, Wronskian drift {drift:e})"
    )]
    Convergence {
        halvings: u32,
        dt: f64,
        rel_change: f64,
        drift: f64,
    },

    #[error("exponential fit not possible: {0}")]
    FitDomain(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_owned(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code grouping errors by category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Parse { .. } => 2,
            Error::Domain(_)
            | Error::SingularCircuit(_)
            | Error::AboveDepairing { .. }
            | Error::QuantizationViolation { .. }
            | Error::InconsistentMass { .. }
            | Error::FitDomain(_) => 3,
            Error::StepSize { .. }
            | Error::Initialization(_)
            | Error::IntegrationFailure { .. }
            | Error::IncompleteGrid { .. }
            | Error::SeriesGap { .. }
            | Error::Convergence { .. } => 4,
            Error::Io { .. } => 5,
        }
    }
}
