//! Hamiltonian systems, the built-in catalogue and the oscillator rescaling.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::state::PhaseState;

pub type EnergyFn = Arc<dyn Fn(&PhaseState) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&PhaseState) -> Vec<f64> + Send + Sync>;
/// `(∂H/∂q, ∂H/∂p)` evaluated on Taylor jets.
pub type JetGradientFn = Arc<dyn Fn(&[Jet], &[Jet]) -> (Vec<Jet>, Vec<Jet>) + Send + Sync>;
pub type FlowFn = Arc<dyn Fn(&PhaseState, f64) -> PhaseState + Send + Sync>;

/// Relative step of the central-difference gradient fallback.
pub const FD_REL_STEP: f64 = 1e-6;

/// Central difference of `f` along coordinate `i` of the stacked vector,
/// with step `FD_REL_STEP · max(1, |x_i|)`.
pub(crate) fn central_partial(f: &dyn Fn(&PhaseState) -> f64, s: &PhaseState, i: usize) -> f64 {
    let mut c = s.coords();
    let h = FD_REL_STEP * c[i].abs().max(1.0);
    let x = c[i];
    c[i] = x + h;
    let fp = f(&PhaseState::raw_coords(&c, s.t()));
    c[i] = x - h;
    let fm = f(&PhaseState::raw_coords(&c, s.t()));
    (fp - fm) / (2.0 * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientSource {
    Analytic,
    FiniteDifference,
}

/// A time-independent Hamiltonian `H(q, p)` on a `2N`-dimensional phase space.
#[derive(Clone)]
pub struct HamiltonianSystem {
    label: String,
    dim: usize,
    energy: EnergyFn,
    grad_q: GradientFn,
    grad_p: GradientFn,
    source: GradientSource,
    jet_gradient: Option<JetGradientFn>,
    exact_flow: Option<FlowFn>,
}

impl fmt::Debug for HamiltonianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSystem")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("gradients", &self.source)
            .field("jets", &self.jet_gradient.is_some())
            .field("exact_flow", &self.exact_flow.is_some())
            .finish()
    }
}

impl HamiltonianSystem {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn energy(&self, s: &PhaseState) -> f64 {
        (self.energy)(s)
    }

    pub fn grad_q(&self, s: &PhaseState) -> Vec<f64> {
        (self.grad_q)(s)
    }

    pub fn grad_p(&self, s: &PhaseState) -> Vec<f64> {
        (self.grad_p)(s)
    }

    pub fn gradient_source(&self) -> GradientSource {
        self.source
    }

    pub fn has_analytic_gradients(&self) -> bool {
        self.source == GradientSource::Analytic
    }

    pub fn jet_gradient(&self) -> Option<&JetGradientFn> {
        self.jet_gradient.as_ref()
    }

    pub fn has_exact_flow(&self) -> bool {
        self.exact_flow.is_some()
    }

    /// The true time-`delta` flow, when the system knows it.
    pub fn exact_flow(&self, s: &PhaseState, delta: f64) -> Result<PhaseState> {
        match &self.exact_flow {
            Some(flow) => Ok(flow(s, delta)),
            None => Err(Error::Capability(format!(
                "system '{}' has no exact flow",
                self.label
            ))),
        }
    }

    /// Energy as a plain closure, for code that wants `&dyn Fn`.
    pub fn energy_fn(&self) -> EnergyFn {
        self.energy.clone()
    }

    pub(crate) fn check_dim(&self, s: &PhaseState) -> Result<()> {
        if s.dim() != self.dim {
            return Err(Error::Parameter(format!(
                "state of dimension {} given to {}-dimensional system '{}'",
                s.dim(),
                self.dim,
                self.label
            )));
        }
        Ok(())
    }
}

/// Builder for user-defined systems; missing gradients fall back to
/// central finite differences of the energy.
pub struct SystemBuilder {
    label: String,
    dim: usize,
    energy: EnergyFn,
    gradients: Option<(GradientFn, GradientFn)>,
    jet_gradient: Option<JetGradientFn>,
    exact_flow: Option<FlowFn>,
}

impl SystemBuilder {
    pub fn new(label: impl Into<String>, dim: usize, energy: EnergyFn) -> Self {
        SystemBuilder {
            label: label.into(),
            dim,
            energy,
            gradients: None,
            jet_gradient: None,
            exact_flow: None,
        }
    }

    pub fn gradients(mut self, grad_q: GradientFn, grad_p: GradientFn) -> Self {
        self.gradients = Some((grad_q, grad_p));
        self
    }

    pub fn jet_gradient(mut self, f: JetGradientFn) -> Self {
        self.jet_gradient = Some(f);
        self
    }

    pub fn exact_flow(mut self, f: FlowFn) -> Self {
        self.exact_flow = Some(f);
        self
    }

    pub fn build(self) -> Result<HamiltonianSystem> {
        if self.dim < 1 {
            return Err(Error::Parameter("system dimension must be at least 1".into()));
        }
        let dim = self.dim;
        let (grad_q, grad_p, source) = match self.gradients {
            Some((gq, gp)) => (gq, gp, GradientSource::Analytic),
            None => {
                let e1 = self.energy.clone();
                let e2 = self.energy.clone();
                let gq: GradientFn = Arc::new(move |s: &PhaseState| {
                    (0..dim).map(|i| central_partial(&*e1, s, i)).collect()
                });
                let gp: GradientFn = Arc::new(move |s: &PhaseState| {
                    (0..dim).map(|i| central_partial(&*e2, s, dim + i)).collect()
                });
                (gq, gp, GradientSource::FiniteDifference)
            }
        };
        Ok(HamiltonianSystem {
            label: self.label,
            dim,
            energy: self.energy,
            grad_q,
            grad_p,
            source,
            jet_gradient: self.jet_gradient,
            exact_flow: self.exact_flow,
        })
    }
}

/// A system from an energy function and optional analytic gradients.
pub fn make_custom_system(
    label: impl Into<String>,
    energy: EnergyFn,
    dim: usize,
    gradients: Option<(GradientFn, GradientFn)>,
) -> Result<HamiltonianSystem> {
    let mut b = SystemBuilder::new(label, dim, energy);
    if let Some((gq, gp)) = gradients {
        b = b.gradients(gq, gp);
    }
    b.build()
}

/// Gradient `(∂H/∂q, ∂H/∂p)` of `H = (p² + q²)/2`.
pub fn ho_gradient<S: Scalar>(q: &[S], p: &[S]) -> (Vec<S>, Vec<S>) {
    (q.to_vec(), p.to_vec())
}

/// Gradient of the pendulum `H = p²/2 + (1 − cos q)`.
pub fn pendulum_gradient<S: Scalar>(q: &[S], p: &[S]) -> (Vec<S>, Vec<S>) {
    (q.iter().map(|x| x.sin()).collect(), p.to_vec())
}

/// Gradient of the quartic oscillator `H = p²/2 + q⁴/4`.
pub fn quartic_gradient<S: Scalar>(q: &[S], p: &[S]) -> (Vec<S>, Vec<S>) {
    (q.iter().map(|x| x.powi(3)).collect(), p.to_vec())
}

/// The time-`t` rotation solving the rescaled oscillator.
pub fn ho_rotation<S: Scalar>(x: &S, p: &S, t: &S) -> (S, S) {
    let (c, s) = (t.cos(), t.sin());
    (
        x.clone() * c.clone() + p.clone() * s.clone(),
        p.clone() * c - x.clone() * s,
    )
}

type GenericGradient = fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>);
type GenericJetGradient = fn(&[Jet], &[Jet]) -> (Vec<Jet>, Vec<Jet>);

fn catalogue_system(
    label: &str,
    energy: fn(f64, f64) -> f64,
    grad: GenericGradient,
    jet: GenericJetGradient,
) -> SystemBuilder {
    let energy: EnergyFn = Arc::new(move |s: &PhaseState| energy(s.q()[0], s.p()[0]));
    let gq: GradientFn = Arc::new(move |s: &PhaseState| grad(s.q(), s.p()).0);
    let gp: GradientFn = Arc::new(move |s: &PhaseState| grad(s.q(), s.p()).1);
    SystemBuilder::new(label, 1, energy)
        .gradients(gq, gp)
        .jet_gradient(Arc::new(jet))
}

/// The rescaled one-dimensional harmonic oscillator `H = (p² + x²)/2`.
pub fn make_harmonic_oscillator() -> HamiltonianSystem {
    catalogue_system(
        "harmonic-oscillator",
        |x, p| 0.5 * (p * p + x * x),
        ho_gradient::<f64>,
        ho_gradient::<Jet>,
    )
    .exact_flow(Arc::new(|s: &PhaseState, t: f64| {
        let (x, p) = ho_rotation(&s.q()[0], &s.p()[0], &t);
        PhaseState::raw(vec![x], vec![p], s.t() + t)
    }))
    .build()
    .expect("catalogue system is well formed")
}

pub fn make_pendulum() -> HamiltonianSystem {
    catalogue_system(
        "pendulum",
        |x, p| 0.5 * p * p + (1.0 - x.cos()),
        pendulum_gradient::<f64>,
        pendulum_gradient::<Jet>,
    )
    .build()
    .expect("catalogue system is well formed")
}

pub fn make_quartic_oscillator() -> HamiltonianSystem {
    catalogue_system(
        "quartic-oscillator",
        |x, p| 0.5 * p * p + 0.25 * x.powi(4),
        quartic_gradient::<f64>,
        quartic_gradient::<Jet>,
    )
    .build()
    .expect("catalogue system is well formed")
}

/// Looks up a catalogue system by its short id (`ho`, `pendulum`, `quartic`).
pub fn catalogue(id: &str) -> Result<HamiltonianSystem> {
    match id {
        "ho" | "harmonic-oscillator" => Ok(make_harmonic_oscillator()),
        "pendulum" => Ok(make_pendulum()),
        "quartic" | "quartic-oscillator" => Ok(make_quartic_oscillator()),
        other => Err(Error::Parameter(format!("unknown system id '{other}'"))),
    }
}

pub const CATALOGUE_IDS: [&str; 3] = ["ho", "pendulum", "quartic"];

/// Extended canonical transformation absorbing mass `m` and stiffness `k`
/// of `H = ρ²/(2m) + kζ²/2`: `x = √k ζ`, `p = ρ/√m`, `t = √(k/m) τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescalingMap {
    mass: f64,
    stiffness: f64,
}

impl RescalingMap {
    pub fn new(mass: f64, stiffness: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) || !(stiffness > 0.0 && stiffness.is_finite()) {
            return Err(Error::Parameter(format!(
                "mass and stiffness must be positive, got m = {mass}, k = {stiffness}"
            )));
        }
        Ok(RescalingMap { mass, stiffness })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }

    /// `(ζ, ρ, τ) → (x, p, t)`.
    pub fn to_rescaled(&self, zeta: f64, rho: f64, tau: f64) -> (f64, f64, f64) {
        (
            self.stiffness.sqrt() * zeta,
            rho / self.mass.sqrt(),
            (self.stiffness / self.mass).sqrt() * tau,
        )
    }

    /// `(x, p, t) → (ζ, ρ, τ)`.
    pub fn to_physical(&self, x: f64, p: f64, t: f64) -> (f64, f64, f64) {
        (
            x / self.stiffness.sqrt(),
            self.mass.sqrt() * p,
            (self.mass / self.stiffness).sqrt() * t,
        )
    }
}

pub fn rescale_physical(
    zeta: f64,
    rho: f64,
    tau: f64,
    mass: f64,
    stiffness: f64,
) -> Result<(f64, f64, f64)> {
    Ok(RescalingMap::new(mass, stiffness)?.to_rescaled(zeta, rho, tau))
}
