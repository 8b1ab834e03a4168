use serde::Serialize;

use crate::error::Result;
use crate::scheme::{generic_rk4_scheme, Scheme};
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;

/// RK4 substeps per recorded step when no exact flow is available.
pub const REFERENCE_SUBSTEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    ExactFlow,
    /// Generic RK4 with [`REFERENCE_SUBSTEPS`] substeps per recorded step.
    Rk4Proxy,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub scheme_name: String,
    pub system_label: String,
    pub seed: PhaseState,
    /// Step sizes actually taken; one fewer than `states`.
    pub steps: Vec<f64>,
    pub states: Vec<PhaseState>,
    /// Reference states at the time tags of `states`.
    pub reference: Option<Vec<PhaseState>>,
    pub reference_kind: Option<ReferenceKind>,
    /// Why the run stopped early, if it did.
    pub failure: Option<String>,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t()).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

pub fn uniform_steps(delta: f64, n: usize) -> Vec<f64> {
    vec![delta; n]
}

/// Iterates `scheme` from `seed`. A failing step ends the run; the record
/// then holds every state reached and the error text.
pub fn run_trajectory(scheme: &dyn Scheme, system_label: &str, seed: &PhaseState, steps: &[f64]) -> TrajectoryRecord {
    let mut states = Vec::with_capacity(steps.len() + 1);
    states.push(seed.clone());
    let mut taken = Vec::with_capacity(steps.len());
    let mut failure = None;
    for &d in steps {
        let last = states.last().expect("seed is present");
        match scheme.step(last, d) {
            Ok(next) => {
                states.push(next);
                taken.push(d);
            }
            Err(e) => {
                failure = Some(format!("step {} (Δ = {d}) from {:?}: {e}", taken.len(), last.coords()));
                break;
            }
        }
    }
    TrajectoryRecord {
        scheme_name: scheme.name().to_string(),
        system_label: system_label.to_string(),
        seed: seed.clone(),
        steps: taken,
        states,
        reference: None,
        reference_kind: None,
        failure,
    }
}

/// Fills in reference states at each time tag: the exact flow from the seed
/// when the system has one, otherwise fine-step generic RK4 between tags.
pub fn attach_reference(record: &mut TrajectoryRecord, sys: &HamiltonianSystem) -> Result<()> {
    let t0 = record.seed.t();
    let (reference, kind) = if sys.has_exact_flow() {
        let r = record
            .states
            .iter()
            .map(|s| sys.exact_flow(&record.seed, s.t() - t0))
            .collect::<Result<Vec<_>>>()?;
        (r, ReferenceKind::ExactFlow)
    } else {
        let rk4 = generic_rk4_scheme(sys);
        let mut cur = record.seed.clone();
        let mut r = Vec::with_capacity(record.states.len());
        r.push(cur.clone());
        for s in &record.states[1..] {
            let h = (s.t() - cur.t()) / REFERENCE_SUBSTEPS as f64;
            for _ in 0..REFERENCE_SUBSTEPS {
                cur = rk4.step(&cur, h)?;
            }
            cur = cur.with_time(s.t());
            r.push(cur.clone());
        }
        (r, ReferenceKind::Rk4Proxy)
    };
    record.reference = Some(reference);
    record.reference_kind = Some(kind);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_lab::reparametrize_time;
    use crate::scheme::{discrete_gradient_ho_scheme, exact_ho_scheme};
    use crate::system::{make_harmonic_oscillator, make_pendulum};
    use std::sync::Arc;

    fn seed() -> PhaseState {
        PhaseState::one_d(1.0, 0.0).unwrap()
    }

    #[test]
    fn exact_run() {
        let r = run_trajectory(&exact_ho_scheme(), "ho", &seed(), &uniform_steps(0.1, 200));
        assert!(r.is_complete());
        assert_eq!(r.states.len(), 201);
        for (n, s) in r.states.iter().enumerate() {
            let t = 0.1 * n as f64;
            assert!((s.q()[0] - t.cos()).abs() < 1e-12 && (s.p()[0] + t.sin()).abs() < 1e-12);
        }
        assert!((r.states[200].t() - 20.0).abs() < 1e-12);
        assert!(r.times().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn empty_run() {
        let r = run_trajectory(&exact_ho_scheme(), "ho", &seed(), &[]);
        assert_eq!(r.states, vec![seed()]);
        assert!(r.steps.is_empty());
    }

    #[test]
    fn forward_then_back() {
        let dg = discrete_gradient_ho_scheme();
        let s0 = PhaseState::one_d(0.3, -0.8).unwrap();
        let r = run_trajectory(&dg, "ho", &s0, &[0.1, 0.25, -0.25, -0.1]);
        assert!(r.states.last().unwrap().max_abs_diff(&s0) < 1e-12);
    }

    #[test]
    fn failing_step_truncates() {
        struct Wall;
        impl Scheme for Wall {
            fn name(&self) -> &str {
                "wall"
            }
            fn dim(&self) -> usize {
                1
            }
            fn claimed_order(&self) -> usize {
                1
            }
            fn group_linear(&self) -> bool {
                false
            }
            fn step(&self, s: &PhaseState, d: f64) -> Result<PhaseState> {
                if s.t() >= 0.25 {
                    Err(crate::Error::Domain("wall".into()))
                } else {
                    Ok(s.clone().with_time(s.t() + d))
                }
            }
        }
        let r = run_trajectory(&Wall, "ho", &seed(), &uniform_steps(0.1, 10));
        assert_eq!(r.states.len(), 4);
        assert_eq!(r.steps.len(), 3);
        assert!(r.failure.as_deref().unwrap().contains("wall"));
    }

    #[test]
    fn reparametrized_times_follow_the_clock() {
        let ho = make_harmonic_oscillator();
        let probes = vec![seed(), PhaseState::one_d(0.2, 0.7).unwrap()];
        let rep = reparametrize_time(Arc::new(discrete_gradient_ho_scheme()), &ho, &probes).unwrap();
        let mut r = run_trajectory(&rep.scheme(), "ho", &seed(), &uniform_steps(0.1, 200));
        attach_reference(&mut r, &ho).unwrap();
        let per_step = 2.0 * 0.05f64.atan();
        assert!((r.states[200].t() - 200.0 * per_step).abs() < 1e-9);
        for (s, e) in r.states.iter().zip(r.reference.as_ref().unwrap()) {
            assert!(s.max_abs_diff(e) < 1e-10);
        }
    }

    #[test]
    fn proxy_reference_on_pendulum() {
        let pend = make_pendulum();
        let rk4 = generic_rk4_scheme(&pend);
        let mut r = run_trajectory(&rk4, "pendulum", &seed(), &uniform_steps(0.1, 50));
        attach_reference(&mut r, &pend).unwrap();
        assert_eq!(r.reference_kind, Some(ReferenceKind::Rk4Proxy));
        let reference = r.reference.as_ref().unwrap();
        // RK4 at Δ = 0.1 over t = 5 stays within its O(Δ⁴) error of the fine run.
        for (s, e) in r.states.iter().zip(reference) {
            assert!(s.max_abs_diff(e) < 1e-4);
            assert_eq!(s.t(), e.t());
        }
        let h0 = pend.energy(&seed());
        assert!((pend.energy(reference.last().unwrap()) - h0).abs() < 1e-12);
    }
}
