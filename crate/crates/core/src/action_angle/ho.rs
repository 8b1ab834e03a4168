use std::f64::consts::TAU;

use crate::action_angle::{ActionAngleChart, AngleAction};
use crate::error::{Error, Result};
use crate::state::PhaseState;
use crate::system::{make_harmonic_oscillator, HamiltonianSystem};

/// Closed-form chart of the rescaled oscillator: `E = (p² + x²)/2`,
/// `θ = atan2(x, p)`, inverse `x = √(2E) sin θ`, `p = √(2E) cos θ`.
#[derive(Debug, Clone)]
pub struct HoChart {
    sys: HamiltonianSystem,
}

impl HoChart {
    pub fn new() -> Self {
        HoChart {
            sys: make_harmonic_oscillator(),
        }
    }
}

impl Default for HoChart {
    fn default() -> Self {
        Self::new()
    }
}

impl ActionAngleChart for HoChart {
    fn name(&self) -> &str {
        "ho"
    }

    fn system(&self) -> &HamiltonianSystem {
        &self.sys
    }

    fn to_action_angle(&self, s: &PhaseState) -> Result<AngleAction> {
        self.sys.check_dim(s)?;
        let (x, p) = (s.q()[0], s.p()[0]);
        let e = 0.5 * (x * x + p * p);
        if e == 0.0 {
            return Err(Error::Domain("the oscillator chart excludes the origin".into()));
        }
        Ok(AngleAction {
            angle: vec![x.atan2(p)],
            action: vec![e],
        })
    }

    fn from_action_angle(&self, aa: &AngleAction) -> Result<PhaseState> {
        let (theta, e) = (aa.angle[0], aa.action[0]);
        if !(e > 0.0) {
            return Err(Error::Domain(format!("oscillator energy must be positive, got {e}")));
        }
        let r = (2.0 * e).sqrt();
        PhaseState::one_d(r * theta.sin(), r * theta.cos())
    }

    fn closed_form_frequencies(&self, _action: &[f64]) -> Option<Vec<f64>> {
        Some(vec![1.0])
    }

    fn angle_periods(&self, _action: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![TAU])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action_angle::{exact_scheme_from_chart, frequencies};
    use crate::scheme::{exact_ho_scheme, Scheme};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;
    use std::sync::Arc;

    fn st(x: f64, p: f64) -> PhaseState {
        PhaseState::one_d(x, p).unwrap()
    }

    #[test]
    fn examples() {
        let c = HoChart::new();
        let aa = c.to_action_angle(&st(1.0, 0.0)).unwrap();
        assert!((aa.angle[0] - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(aa.action[0], 0.5);
        let s = c
            .from_action_angle(&AngleAction { angle: vec![0.0], action: vec![0.5] })
            .unwrap();
        assert!(s.q()[0].abs() < 1e-15 && (s.p()[0] - 1.0).abs() < 1e-15);
        assert!(c.to_action_angle(&st(0.0, 0.0)).is_err());
    }

    #[test]
    fn chain_rule_frequency() {
        let c = HoChart::new();
        for &(x, p) in &[(1.0, 1.0), (0.3, -2.0), (-1.5, 0.02)] {
            let nu = frequencies(&c, &st(x, p)).unwrap();
            assert!((nu[0] - 1.0).abs() < 1e-6, "({x}, {p}) → {nu:?}");
        }
    }

    #[test]
    fn assembled_scheme_matches_rotation() {
        let seed = st(1.0, 0.0);
        let chart_scheme = exact_scheme_from_chart(Arc::new(HoChart::new()), &seed).unwrap();
        let exact = exact_ho_scheme();
        let (mut a, mut b) = (seed.clone(), seed);
        for _ in 0..200 {
            a = chart_scheme.step(&a, 0.1).unwrap();
            b = exact.step(&b, 0.1).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-9);
        }
    }

    #[test]
    fn discrete_motion_limit() {
        let e = exact_ho_scheme();
        let (x, p, d) = (0.7, -0.2, 1e-5);
        let out = e.step(&st(x, p), d).unwrap();
        assert!(((out.q()[0] - x) / d - p).abs() < 1e-4);
        assert!(((out.p()[0] - p) / d + x).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn chart_invariants(x in -2.0..2.0f64, p in -2.0..2.0f64, d in -3.0..3.0f64) {
            prop_assume!(x * x + p * p > 1e-4);
            let c = HoChart::new();
            let s = st(x, p);
            let aa = c.to_action_angle(&s).unwrap();
            prop_assert!(c.from_action_angle(&aa).unwrap().max_abs_diff(&s) < 1e-9);
            let moved = exact_ho_scheme().step(&s, d).unwrap();
            let bb = c.to_action_angle(&moved).unwrap();
            prop_assert!((bb.action[0] - aa.action[0]).abs() < 1e-9);
            let adv = crate::action_angle::wrap_centered(bb.angle[0] - aa.angle[0] - d, TAU);
            prop_assert!(adv.abs() < 1e-8);
        }
    }
}
