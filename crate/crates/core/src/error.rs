use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The requested operation needs something the system or scheme does
    /// not provide (exact flow, analytic gradients, derivative depth).
    #[error("capability unavailable: {0}")]
    Capability(String),

    #[error("scheme is inconsistent with the evolution generator: {0}")]
    Inconsistent(String),

    #[error("not time-reparametrizable: {0}")]
    NotReparametrizable(String),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Failure inside the action-angle construction, tagged with the step
    /// (1 to 7) of the generating-function procedure where it happened.
    #[error("action-angle pipeline failed at step {step}: {reason}")]
    Pipeline { step: u8, reason: PipelineFailure },
}

impl Error {
    pub(crate) fn pipeline(step: u8, reason: PipelineFailure) -> Self {
        Error::Pipeline { step, reason }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineFailure {
    /// No point of the well reaches this energy (it lies below the well bottom).
    UnreachableEnergy { energy: f64 },
    /// `H(q, ·)` is not increasing in `|p|` on the requested branch.
    NonMonotoneBranch { q: f64 },
    /// A turning point of the energy level could not be bracketed.
    TurningPoint(String),
    Quadrature(String),
    Inversion(String),
    /// The energy of a state lies outside the chart's window.
    OutsideWindow { energy: f64, lo: f64, hi: f64 },
}

impl fmt::Display for PipelineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineFailure::UnreachableEnergy { energy } => {
                write!(f, "energy {energy} is not reachable inside the well")
            }
            PipelineFailure::NonMonotoneBranch { q } => {
                write!(f, "momentum branch is not monotone at q = {q}")
            }
            PipelineFailure::TurningPoint(msg) => write!(f, "turning point: {msg}"),
            PipelineFailure::Quadrature(msg) => write!(f, "quadrature: {msg}"),
            PipelineFailure::Inversion(msg) => write!(f, "angle inversion: {msg}"),
            PipelineFailure::OutsideWindow { energy, lo, hi } => {
                write!(f, "energy {energy} outside window [{lo}, {hi}]")
            }
        }
    }
}
