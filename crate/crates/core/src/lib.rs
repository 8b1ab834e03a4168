//! One-step phase-space maps for time-independent Hamiltonian systems.
//!
//! A time integrator is treated as a group-like map `ψ_Δ` acting on phase
//! space. The crate provides:
//!
//! * the evolution generator `g = Σ ∂H/∂p ∂/∂q − ∂H/∂q ∂/∂p`, Poisson
//!   brackets and truncated Lie series ([`lie`]);
//! * a small catalogue of systems and concrete schemes ([`system`],
//!   [`scheme`]);
//! * exact schemes assembled from action-angle charts ([`action_angle`]);
//! * extraction, classification and correction of local error fields
//!   ([`error_lab`]);
//! * trajectory runs, σ error metrics and scheme audits ([`diagnostics`]).

pub mod action_angle;
pub mod diagnostics;
pub mod error;
pub mod error_lab;
pub mod field;
pub mod jet;
pub mod lie;
pub mod quad;
pub mod scheme;
pub mod state;
pub mod system;

pub use error::{Error, PipelineFailure, Result};
pub use field::ScalarField;
pub use jet::{Jet, Scalar};
pub use lie::{MapJacobian, VectorField, VectorFieldSample};
pub use scheme::{Scheme, SharedScheme};
pub use state::PhaseState;
pub use system::HamiltonianSystem;
