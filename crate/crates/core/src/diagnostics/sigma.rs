use serde::Serialize;

use crate::diagnostics::trajectory::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::field::ScalarField;

/// `σ(φ) = (φ(ref) − φ(num))²` per recorded state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalSigma {
    pub name: String,
    /// `None` where the numeric or the reference state is in the singular band.
    pub values: Vec<Option<f64>>,
    pub excluded: Vec<usize>,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    /// Squared phase-space distance to the reference per state.
    pub sigma_phase: Vec<f64>,
    pub max_phase: f64,
    pub mean_phase: f64,
    pub functionals: Vec<FunctionalSigma>,
}

impl ErrorReport {
    pub fn functional(&self, name: &str) -> Option<&FunctionalSigma> {
        self.functionals.iter().find(|f| f.name == name)
    }
}

fn summary(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut max, mut sum, mut n) = (0.0f64, 0.0, 0usize);
    for v in values {
        max = max.max(v);
        sum += v;
        n += 1;
    }
    (max, if n == 0 { 0.0 } else { sum / n as f64 })
}

pub fn sigma_phase(record: &TrajectoryRecord, functionals: &[ScalarField]) -> Result<ErrorReport> {
    let reference = record
        .reference
        .as_ref()
        .ok_or_else(|| Error::Capability("σ needs reference states; attach a reference first".into()))?;
    let pairs: Vec<_> = record.states.iter().zip(reference).collect();
    let sigma: Vec<f64> = pairs.iter().map(|(s, r)| s.distance_sq(r)).collect();
    let (max_phase, mean_phase) = summary(sigma.iter().copied());
    let functionals = functionals
        .iter()
        .map(|phi| {
            let mut excluded = Vec::new();
            let values: Vec<Option<f64>> = pairs
                .iter()
                .enumerate()
                .map(|(i, (s, r))| {
                    if phi.is_singular(s) || phi.is_singular(r) {
                        excluded.push(i);
                        None
                    } else {
                        let d = phi.eval(r) - phi.eval(s);
                        Some(d * d)
                    }
                })
                .collect();
            let (max, mean) = summary(values.iter().flatten().copied());
            FunctionalSigma {
                name: phi.name().to_string(),
                values,
                excluded,
                max,
                mean,
            }
        })
        .collect();
    Ok(ErrorReport {
        sigma_phase: sigma,
        max_phase,
        mean_phase,
        functionals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::trajectory::{attach_reference, run_trajectory, uniform_steps};
    use crate::field::SINGULAR_BAND;
    use crate::scheme::{discrete_gradient_ho_scheme, euler_scheme, exact_ho_scheme};
    use crate::state::PhaseState;
    use crate::system::make_harmonic_oscillator;

    fn standard(scheme: &dyn crate::scheme::Scheme) -> TrajectoryRecord {
        let ho = make_harmonic_oscillator();
        let mut r = run_trajectory(scheme, "ho", &PhaseState::one_d(1.0, 0.0).unwrap(), &uniform_steps(0.1, 200));
        attach_reference(&mut r, &ho).unwrap();
        r
    }

    fn fields() -> Vec<ScalarField> {
        let ho = make_harmonic_oscillator();
        vec![ScalarField::ratio_q_over_p(0, SINGULAR_BAND), ScalarField::twice_energy(&ho)]
    }

    #[test]
    fn exact_run_has_rounding_level_error() {
        let rep = sigma_phase(&standard(&exact_ho_scheme()), &fields()).unwrap();
        assert!(rep.max_phase <= 1e-20, "{}", rep.max_phase);
    }

    #[test]
    fn discrete_gradient_keeps_energy() {
        let rep = sigma_phase(&standard(&discrete_gradient_ho_scheme()), &fields()).unwrap();
        assert!(rep.functional("2H").unwrap().max <= 1e-20);
        assert!(rep.sigma_phase[200] > 1e-6);
        assert!(rep.sigma_phase[200] > rep.sigma_phase[100]);
    }

    #[test]
    fn identical_states_give_zero() {
        let mut r = standard(&exact_ho_scheme());
        r.reference = Some(r.states.clone());
        let rep = sigma_phase(&r, &fields()).unwrap();
        assert!(rep.sigma_phase.iter().all(|&v| v == 0.0));
        assert!(rep.functionals.iter().all(|f| f.values.iter().flatten().all(|&v| v == 0.0)));
    }

    #[test]
    fn ratio_excludes_small_momentum() {
        let rep = sigma_phase(&standard(&euler_scheme(&make_harmonic_oscillator())), &fields()).unwrap();
        let f = rep.functional("x/p").unwrap();
        assert!(f.excluded.contains(&0));
        assert!(f.values.iter().all(|v| v.map_or(true, |x| x >= 0.0)));
    }

    #[test]
    fn missing_reference() {
        let r = run_trajectory(&exact_ho_scheme(), "ho", &PhaseState::one_d(1.0, 0.0).unwrap(), &[0.1]);
        assert!(matches!(sigma_phase(&r, &[]), Err(Error::Capability(_))));
    }
}
