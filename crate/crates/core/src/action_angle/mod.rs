//! Action-angle charts and the exact schemes assembled from them.
//!
//! A chart maps `(q, p)` to angles `θ` and actions `I` in which the motion is
//! `θ(t) = θ₀ + ν t`, `I = const`. Advancing the angle by `νΔ` and mapping
//! back gives the exact time-`Δ` step.

mod ho;
mod numeric;

use std::sync::Arc;

pub use ho::HoChart;
pub use numeric::{GeneratingFunction, NumericChart1d};

use crate::error::{Error, Result};
use crate::lie::evolution_generator;
use crate::scheme::Scheme;
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;

/// Angles `θ` and actions `I` of one point.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleAction {
    pub angle: Vec<f64>,
    pub action: Vec<f64>,
}

/// Sign `ε` of the momentum branch `p = ε·|p(q, I)|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Upper,
    Lower,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }

    pub fn of_momentum(p: f64) -> Branch {
        if p < 0.0 {
            Branch::Lower
        } else {
            Branch::Upper
        }
    }
}

pub trait ActionAngleChart: Send + Sync {
    fn name(&self) -> &str;

    fn system(&self) -> &HamiltonianSystem;

    fn to_action_angle(&self, s: &PhaseState) -> Result<AngleAction>;

    fn from_action_angle(&self, aa: &AngleAction) -> Result<PhaseState>;

    /// Frequencies `ν(I)` when the chart knows them in closed form.
    fn closed_form_frequencies(&self, _action: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Period of each angle at the given actions.
    fn angle_periods(&self, action: &[f64]) -> Result<Vec<f64>>;
}

pub type SharedChart = Arc<dyn ActionAngleChart>;

/// Wraps `x` into `[−T/2, T/2)`.
pub(crate) fn wrap_centered(x: f64, period: f64) -> f64 {
    x - period * (x / period + 0.5).floor()
}

/// `ν_k = Σ_j ∂θ_k/∂q_j ∂H/∂p_j − ∂θ_k/∂p_j ∂H/∂q_j` at `s`, by central
/// differences of the chart angles (angle jumps are unwrapped by the period).
pub fn frequencies(chart: &dyn ActionAngleChart, s: &PhaseState) -> Result<Vec<f64>> {
    let sys = chart.system();
    let base = chart.to_action_angle(s)?;
    let periods = chart.angle_periods(&base.action)?;
    let g = evolution_generator(sys, s)?.stacked();
    let c = s.coords();
    let n = s.dim();
    let mut nu = vec![0.0; n];
    for i in 0..2 * n {
        let h = 1e-4 * c[i].abs().max(1.0);
        let mut plus = c.clone();
        let mut minus = c.clone();
        plus[i] += h;
        minus[i] -= h;
        let fp = chart.to_action_angle(&PhaseState::raw_coords(&plus, s.t()))?;
        let fm = chart.to_action_angle(&PhaseState::raw_coords(&minus, s.t()))?;
        for k in 0..n {
            let diff = wrap_centered(fp.angle[k] - fm.angle[k], periods[k]);
            nu[k] += diff / (2.0 * h) * g[i];
        }
    }
    if nu.iter().any(|v| !v.is_finite()) {
        return Err(Error::pipeline(
            6,
            crate::error::PipelineFailure::Quadrature(format!("non-finite frequency at {c:?}")),
        ));
    }
    Ok(nu)
}

/// The exact scheme `θ ↦ θ + νΔ` at fixed actions `γ = I(s₀)`.
pub struct ChartExactScheme {
    chart: SharedChart,
    gamma: Vec<f64>,
    nu: Vec<f64>,
    name: String,
}

impl std::fmt::Debug for ChartExactScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartExactScheme")
            .field("chart", &self.chart.name())
            .field("gamma", &self.gamma)
            .field("nu", &self.nu)
            .finish()
    }
}

/// Assembles the exact scheme of `chart` anchored at the seed `s0`; the
/// actions are frozen at their seed values.
pub fn exact_scheme_from_chart(chart: SharedChart, s0: &PhaseState) -> Result<ChartExactScheme> {
    let aa = chart.to_action_angle(s0).map_err(|e| match e {
        Error::Pipeline { reason, .. } => Error::pipeline(7, reason),
        other => other,
    })?;
    let nu = match chart.closed_form_frequencies(&aa.action) {
        Some(nu) => nu,
        None => frequencies(chart.as_ref(), s0)?,
    };
    Ok(ChartExactScheme {
        name: format!("chart-exact[{}]", chart.name()),
        chart,
        gamma: aa.action,
        nu,
    })
}

impl ChartExactScheme {
    /// Actions frozen at the seed.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }
}

impl Scheme for ChartExactScheme {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.gamma.len()
    }

    fn claimed_order(&self) -> usize {
        0
    }

    fn group_linear(&self) -> bool {
        true
    }

    fn step(&self, s: &PhaseState, delta: f64) -> Result<PhaseState> {
        let leave = |e: Error| Error::Domain(format!("chart left at state {:?}: {e}", s.coords()));
        let aa = self.chart.to_action_angle(s).map_err(leave)?;
        let angle = aa.angle.iter().zip(&self.nu).map(|(t, n)| t + n * delta).collect();
        let out = self
            .chart
            .from_action_angle(&AngleAction {
                angle,
                action: self.gamma.clone(),
            })
            .map_err(leave)?;
        Ok(out.with_time(s.t() + delta))
    }
}
