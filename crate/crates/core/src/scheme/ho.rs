//! Closed-form schemes for the rescaled oscillator `H = (p² + x²)/2`.

use crate::error::Result;
use crate::jet::{Jet, Scalar};
use crate::scheme::Scheme;
use crate::state::PhaseState;
use crate::system::ho_rotation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoMap {
    /// Rotation by `Δ`.
    Exact,
    /// Fourth-order truncation of the rotation.
    Rk4Polynomial,
    /// Energy-conserving rational map.
    DiscreteGradient,
}

impl HoMap {
    /// `(X, P)` for `(x, p)` and step `Δ`, valid for numbers and jets alike.
    pub fn apply<S: Scalar>(self, x: &S, p: &S, d: &S) -> (S, S) {
        match self {
            HoMap::Exact => ho_rotation(x, p, d),
            HoMap::Rk4Polynomial => {
                let d2 = d.clone() * d.clone();
                let d3 = d2.clone() * d.clone();
                let d4 = d3.clone() * d.clone();
                let c = d.lift(1.0) - d2.scale(0.5) + d4.scale(1.0 / 24.0);
                let s = d.clone() - d3.scale(1.0 / 6.0);
                (
                    x.clone() * c.clone() + p.clone() * s.clone(),
                    p.clone() * c - x.clone() * s,
                )
            }
            HoMap::DiscreteGradient => {
                let d2 = d.clone() * d.clone();
                let den = d.lift(4.0) + d2.clone();
                let four = d.lift(4.0);
                let xs = (four.clone() * x.clone() + four.clone() * d.clone() * p.clone()
                    - d2.clone() * x.clone())
                    / den.clone();
                let ps = (four.clone() * p.clone() - four * d.clone() * x.clone() - d2 * p.clone()) / den;
                (xs, ps)
            }
        }
    }
}

/// One of the three closed-form oscillator schemes.
#[derive(Debug, Clone)]
pub struct HoScheme {
    map: HoMap,
    name: &'static str,
}

pub fn exact_ho_scheme() -> HoScheme {
    HoScheme { map: HoMap::Exact, name: "exact-ho" }
}

pub fn rk4_ho_scheme() -> HoScheme {
    HoScheme { map: HoMap::Rk4Polynomial, name: "rk4-ho" }
}

pub fn discrete_gradient_ho_scheme() -> HoScheme {
    HoScheme { map: HoMap::DiscreteGradient, name: "discrete-gradient" }
}

impl HoScheme {
    pub fn map(&self) -> HoMap {
        self.map
    }

    fn expand(&self, s: &PhaseState, delta: f64, order: usize) -> Vec<Vec<f64>> {
        let x = Jet::constant(s.q()[0], order);
        let p = Jet::constant(s.p()[0], order);
        let d = Jet::variable(delta, order);
        let (xs, ps) = self.map.apply(&x, &p, &d);
        (0..=order).map(|k| vec![xs.coeff(k), ps.coeff(k)]).collect()
    }

    fn check(&self, s: &PhaseState) -> Result<()> {
        if s.dim() != 1 {
            return Err(crate::Error::Parameter(format!(
                "{} acts on one degree of freedom, got dimension {}",
                self.name,
                s.dim()
            )));
        }
        Ok(())
    }
}

impl Scheme for HoScheme {
    fn name(&self) -> &str {
        self.name
    }

    fn dim(&self) -> usize {
        1
    }

    fn claimed_order(&self) -> usize {
        match self.map {
            HoMap::Exact => 0,
            HoMap::Rk4Polynomial => 4,
            HoMap::DiscreteGradient => 2,
        }
    }

    fn group_linear(&self) -> bool {
        self.map == HoMap::Exact
    }

    fn step(&self, s: &PhaseState, delta: f64) -> Result<PhaseState> {
        self.check(s)?;
        let (x, p) = self.map.apply(&s.q()[0], &s.p()[0], &delta);
        PhaseState::raw(vec![x], vec![p], s.t() + delta).checked(self.name)
    }

    fn d_delta(&self, s: &PhaseState, delta: f64) -> Option<Result<Vec<f64>>> {
        Some(self.check(s).map(|_| self.expand(s, delta, 1).swap_remove(1)))
    }

    fn has_analytic_d_delta(&self) -> bool {
        true
    }

    fn delta_taylor(&self, s: &PhaseState, order: usize) -> Option<Result<Vec<Vec<f64>>>> {
        Some(self.check(s).map(|_| self.expand(s, 0.0, order)))
    }
}
