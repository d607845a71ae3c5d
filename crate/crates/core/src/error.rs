use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solvers and the configuration/output layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("viscosity law undefined at p = {pressure:e} Pa: {reason}")]
    ViscosityDomain { pressure: f64, reason: &'static str },

    #[error("coordinate transform singular at theta = {theta:e} rad")]
    Singularity { theta: f64 },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("theta = {theta:e} rad outside [{lo:e}, {hi:e}]")]
    OutOfRange { theta: f64, lo: f64, hi: f64 },

    #[error("{what} did not converge after {iterations} iterations (last change {residual:e})")]
    NonConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("zero entrainment: pressure identically zero, theta2 undefined")]
    ZeroEntrainment,

    #[error(
        "exit slope does not change sign over the bracket: slope {lower_slope:e} at theta2 = 0, \
         {upper_slope:e} at theta2 = pi/2"
    )]
    BracketFailure { lower_slope: f64, upper_slope: f64 },

    #[error("ellipticity lost: pressure coefficient {value:e} at theta = {theta:e} rad")]
    EllipticityLoss { theta: f64, value: f64 },

    #[error(
        "outer iteration diverging: L2 differences non-decreasing up to iteration {iteration}"
    )]
    Divergence { iteration: usize },

    #[error("outer iteration {iteration}: {source}")]
    Outer {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Strips iteration context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Outer { source, .. } => source.root(),
            e => e,
        }
    }

    /// Machine-readable error kind, as written to `report.json`.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::InvalidParameter { .. } | Error::Config(_) => "config",
            Error::ViscosityDomain { .. } => "viscosity_domain",
            Error::Singularity { .. } => "singularity",
            Error::SingularSystem(_) => "singular_system",
            Error::FieldMismatch(_) => "field_mismatch",
            Error::OutOfRange { .. } => "out_of_range",
            Error::NonConvergence { .. } => "non_convergence",
            Error::ZeroEntrainment => "zero_entrainment",
            Error::BracketFailure { .. } => "bracket_failure",
            Error::EllipticityLoss { .. } => "ellipticity_loss",
            Error::Divergence { .. } => "divergence",
            Error::Io { .. } => "io",
            Error::Json(_) => "parse",
            Error::Outer { .. } => unreachable!(),
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
