//! Time reparametrization of schemes whose defect is a multiple of `𝔤`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::error_lab::defect::defect_field;
use crate::lie::evolution_generator;
use crate::quad::integrate;
use crate::scheme::{Scheme, SharedScheme};
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;

/// Agreement demanded of the defect ratio across probes and components.
pub const RATIO_TOL: f64 = 1e-8;
/// Absolute tolerance of the clock quadrature.
pub const CLOCK_QUAD_TOL: f64 = 1e-10;
/// Step sizes at which state-independence of the ratio is checked up front.
pub const VALIDATION_STEPS: [f64; 5] = [-0.2, 0.05, 0.1, 0.2, 0.4];

/// A scheme whose defect is `λ(Δ)·𝔤` with `λ` independent of the state.
#[derive(Clone)]
pub struct Reparametrization {
    scheme: SharedScheme,
    sys: HamiltonianSystem,
    probes: Vec<PhaseState>,
}

impl std::fmt::Debug for Reparametrization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Reparametrization")
            .field("scheme", &self.scheme.name())
            .field("probes", &self.probes.len())
            .finish()
    }
}

/// Estimates `λ(Δ)` at each probe and checks that it is one scalar.
fn defect_ratio(scheme: &dyn Scheme, sys: &HamiltonianSystem, probes: &[PhaseState], delta: f64) -> Result<f64> {
    let mut first: Option<f64> = None;
    for s in probes {
        let d = defect_field(scheme, s, delta)?.field;
        let g = evolution_generator(sys, s)?;
        let gg = g.dot(&g);
        if gg == 0.0 {
            return Err(Error::Parameter(format!(
                "probe {:?} is a fixed point of the flow",
                s.coords()
            )));
        }
        let lambda = d.dot(&g) / gg;
        let off = d.sub(&g.scale(lambda)).norm_inf();
        let tol = RATIO_TOL * g.norm_inf().max(1.0);
        if off > tol {
            return Err(Error::NotReparametrizable(format!(
                "{}: defect at {:?}, Δ = {delta} is not parallel to the generator (off by {off:e})",
                scheme.name(),
                s.coords()
            )));
        }
        match first {
            None => first = Some(lambda),
            Some(l0) if (lambda - l0).abs() > RATIO_TOL * l0.abs().max(1.0) => {
                return Err(Error::NotReparametrizable(format!(
                    "{}: defect ratio depends on the state ({l0} vs {lambda} at Δ = {delta})",
                    scheme.name()
                )));
            }
            Some(_) => {}
        }
    }
    first.ok_or_else(|| Error::Parameter("reparametrization needs at least one probe state".into()))
}

/// Checks that the defect of `scheme` is `λ(Δ)·𝔤` with state-independent `λ`
/// on the probes, and returns the clock correction.
pub fn reparametrize_time(
    scheme: SharedScheme,
    sys: &HamiltonianSystem,
    probes: &[PhaseState],
) -> Result<Reparametrization> {
    for &d in &VALIDATION_STEPS {
        defect_ratio(scheme.as_ref(), sys, probes, d)?;
    }
    Ok(Reparametrization {
        scheme,
        sys: sys.clone(),
        probes: probes.to_vec(),
    })
}

impl Reparametrization {
    /// Scalar defect ratio `λ(Δ)`.
    pub fn lambda(&self, delta: f64) -> Result<f64> {
        defect_ratio(self.scheme.as_ref(), &self.sys, &self.probes, delta)
    }

    /// Physical time covered by one step: `∫₀^Δ λ(τ) dτ`.
    pub fn time_advance(&self, delta: f64) -> Result<f64> {
        let mut failure = None;
        let q = integrate(
            |tau| match self.lambda(tau) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            0.0,
            delta,
            CLOCK_QUAD_TOL,
            0.0,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(q?.value)
    }

    /// Time deficit `W(Δ) = Δ − ∫₀^Δ λ`: how far the step label runs ahead of
    /// the time actually covered.
    pub fn w(&self, delta: f64) -> Result<f64> {
        Ok(delta - self.time_advance(delta)?)
    }

    pub fn base(&self) -> &SharedScheme {
        &self.scheme
    }

    /// The base scheme with its clock advanced by `∫₀^Δ λ` instead of `Δ`.
    pub fn scheme(&self) -> ReparametrizedScheme {
        ReparametrizedScheme {
            name: format!("{}-reparam", self.scheme.name()),
            inner: Arc::new(self.clone()),
        }
    }
}

pub struct ReparametrizedScheme {
    inner: Arc<Reparametrization>,
    name: String,
}

impl ReparametrizedScheme {
    pub fn reparametrization(&self) -> &Reparametrization {
        &self.inner
    }
}

impl Scheme for ReparametrizedScheme {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.inner.scheme.dim()
    }

    /// Exact once read against the corrected clock.
    fn claimed_order(&self) -> usize {
        0
    }

    fn group_linear(&self) -> bool {
        false
    }

    fn step(&self, s: &PhaseState, delta: f64) -> Result<PhaseState> {
        let out = self.inner.scheme.step(s, delta)?;
        Ok(out.with_time(s.t() + self.inner.time_advance(delta)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{discrete_gradient_ho_scheme, euler_scheme, exact_ho_scheme};
    use crate::system::make_harmonic_oscillator;

    fn probes() -> Vec<PhaseState> {
        [(1.0, 0.0), (-0.3, 1.2), (0.7, -0.9)]
            .iter()
            .map(|&(x, p)| PhaseState::one_d(x, p).unwrap())
            .collect()
    }

    #[test]
    fn discrete_gradient_clock() {
        let ho = make_harmonic_oscillator();
        let r = reparametrize_time(Arc::new(discrete_gradient_ho_scheme()), &ho, &probes()).unwrap();
        for &d in &[0.01, 0.1, 0.3, 0.5] {
            let w: f64 = d - 2.0 * (d / 2.0f64).atan();
            assert!((r.w(d).unwrap() - w).abs() < 1e-12, "Δ = {d}");
            assert!((r.lambda(d).unwrap() - 4.0 / (4.0 + d * d)).abs() < 1e-12);
        }
        assert_eq!(r.w(0.0).unwrap(), 0.0);
        assert!((r.w(-0.3).unwrap() + r.w(0.3).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn derivative_of_deficit() {
        let ho = make_harmonic_oscillator();
        let r = reparametrize_time(Arc::new(discrete_gradient_ho_scheme()), &ho, &probes()).unwrap();
        let h = 1e-4;
        for &d in &[0.05, 0.1, 0.2, 0.4] {
            let dw = (r.w(d + h).unwrap() - r.w(d - h).unwrap()) / (2.0 * h);
            assert!((dw - (1.0 - r.lambda(d).unwrap())).abs() < 1e-8);
        }
    }

    #[test]
    fn reparametrized_trajectory_is_exact() {
        let ho = make_harmonic_oscillator();
        let r = reparametrize_time(Arc::new(discrete_gradient_ho_scheme()), &ho, &probes()).unwrap();
        let sch = r.scheme();
        let seed = PhaseState::one_d(1.0, 0.0).unwrap();
        let mut s = seed.clone();
        for _ in 0..50 {
            s = sch.step(&s, 0.1).unwrap();
            let e = ho.exact_flow(&seed, s.t()).unwrap();
            assert!(s.max_abs_diff(&e) < 1e-10);
        }
    }

    #[test]
    fn exact_scheme_has_unit_ratio() {
        let ho = make_harmonic_oscillator();
        let r = reparametrize_time(Arc::new(exact_ho_scheme()), &ho, &probes()).unwrap();
        assert!((r.lambda(0.3).unwrap() - 1.0).abs() < 1e-14);
        assert!(r.w(0.3).unwrap().abs() < 1e-14);
    }

    #[test]
    fn euler_is_refused() {
        let ho = make_harmonic_oscillator();
        let r = reparametrize_time(Arc::new(euler_scheme(&ho)), &ho, &probes());
        assert!(matches!(r, Err(Error::NotReparametrizable(_))));
    }
}
