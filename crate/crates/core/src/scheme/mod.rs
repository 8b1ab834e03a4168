//! One-step maps `ψ_Δ` and the concrete schemes.

mod corrected;
mod generic;
mod ho;

use std::fmt;
use std::sync::Arc;

pub use corrected::{corrected_scheme, CorrectedScheme};
pub use generic::{euler_scheme, generic_rk4_scheme, lie_series_scheme, EulerScheme, LieSeriesScheme, Rk4Scheme};
pub use ho::{discrete_gradient_ho_scheme, exact_ho_scheme, rk4_ho_scheme, HoMap, HoScheme};

use crate::error::Result;
use crate::state::PhaseState;

/// A one-step map `ψ_Δ` closed over its system.
///
/// `step` returns the advanced state with its time tag moved by `Δ`
/// (reparametrized schemes apply their own clock).
pub trait Scheme: Send + Sync {
    fn name(&self) -> &str;

    /// Phase-space dimension `N` the scheme acts on.
    fn dim(&self) -> usize;

    /// Local order; `0` marks an exact scheme.
    fn claimed_order(&self) -> usize;

    /// Whether `ψ_{Δ1} ∘ ψ_{Δ2} = ψ_{Δ1+Δ2}` is claimed.
    fn group_linear(&self) -> bool;

    fn step(&self, s: &PhaseState, delta: f64) -> Result<PhaseState>;

    /// `∂ψ_Δ(s)/∂Δ` in stacked coordinates, when available in closed form.
    fn d_delta(&self, _s: &PhaseState, _delta: f64) -> Option<Result<Vec<f64>>> {
        None
    }

    fn has_analytic_d_delta(&self) -> bool {
        false
    }

    /// Taylor coefficients `c_0..c_order` of `Δ ↦ ψ_Δ(s)` around `Δ = 0`,
    /// when the map can be expanded exactly.
    fn delta_taylor(&self, _s: &PhaseState, _order: usize) -> Option<Result<Vec<Vec<f64>>>> {
        None
    }
}

pub type SharedScheme = Arc<dyn Scheme>;

impl fmt::Debug for dyn Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scheme")
            .field("name", &self.name())
            .field("order", &self.claimed_order())
            .field("group_linear", &self.group_linear())
            .finish()
    }
}

/// Applies `ψ` repeatedly with the given steps, returning every visited state.
pub fn iterate(scheme: &dyn Scheme, seed: &PhaseState, steps: &[f64]) -> Result<Vec<PhaseState>> {
    let mut out = Vec::with_capacity(steps.len() + 1);
    out.push(seed.clone());
    for &d in steps {
        let next = scheme.step(out.last().expect("non-empty"), d)?;
        out.push(next);
    }
    Ok(out)
}
