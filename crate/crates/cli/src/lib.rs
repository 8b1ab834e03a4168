//! Command-line experiments on top of `hamflow-core`: trajectories with
//! squared-error metrics, error-field analysis, scheme correction,
//! action-angle charts and property audits.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod registry;
pub mod svg;

pub use error::{CliError, CliResult};
pub use manifest::{Overrides, RunManifest, Seed, StepSpec, Tolerances};
