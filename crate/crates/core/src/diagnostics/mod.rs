//! Trajectory runs, squared-distance error metrics and scheme audits.

mod audit;
mod sigma;
mod trajectory;

pub use audit::{audit_scheme, AuditCheck, AuditConfig, AuditReport, CompositeStep};
pub use sigma::{sigma_phase, ErrorReport, FunctionalSigma};
pub use trajectory::{
    attach_reference, run_trajectory, uniform_steps, ReferenceKind, TrajectoryRecord, REFERENCE_SUBSTEPS,
};
