//! Local-error analysis of one-step schemes.
//!
//! For a scheme `ψ_Δ` the local error `w_Δ = ψ_Δ − exp(Δ𝔤) = Σ_{k≥2} Δᵏ/k! v_k`
//! is probed three ways: by differencing against a known exact flow, by exact
//! Taylor expansion, and through the defect field `ψ₋Δ∘∂_Δψ_Δ`.

mod classify;
mod defect;
mod invariant;
mod reparam;
mod series;

pub use classify::{classify_leading_error, Classification, ErrorClass, FIT_TOL, ZERO_FIELD_TOL};
pub use defect::{
    defect_field, delta_derivative, delta_derivative_step, recover_v2, recover_v3, taylor_defect, DefectSample,
    CONSISTENCY_TOL, FIT_NODES, MAX_DEFECT_ORDER,
};
pub use invariant::{square_grid, verify_error_invariant, InvariantReport, INVARIANT_TOL};
pub use reparam::{reparametrize_time, Reparametrization, ReparametrizedScheme, CLOCK_QUAD_TOL, RATIO_TOL};
pub use series::{
    best_errors, defect_errors, error_field, flow_difference_errors, taylor_errors, ErrorMethod, ErrorSeries,
    FLOW_DIFFERENCE_SPACING, MAX_ERROR_ORDER,
};
