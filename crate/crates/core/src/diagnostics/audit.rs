//! Property audit of a scheme: identity at zero, inverse, group law,
//! symplecticity, energy drift and the consistency limit.

use serde::Serialize;

use crate::lie::{evolution_generator, refined_jacobian, symplectic_defect};
use crate::scheme::Scheme;
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditConfig {
    /// Pass threshold of the identity, inverse, group-law, symplectic and
    /// energy checks.
    pub tolerance: f64,
    pub consistency_step: f64,
    pub consistency_tolerance: f64,
    /// Finite-difference step of the audit Jacobian.
    pub jacobian_step: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            tolerance: 1e-10,
            consistency_step: 1e-4,
            consistency_tolerance: 1e-3,
            jacobian_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditCheck {
    pub name: String,
    /// Step size the check ran at; `None` for step-independent checks.
    pub delta: Option<f64>,
    /// Largest defect over the sample states.
    pub measured: f64,
    pub pass: bool,
    /// Set when the check could not be evaluated.
    pub error: Option<String>,
}

/// Single step `Δ'` with `ψ_{Δ'} ≈ ψ_Δ∘ψ_Δ`, fitted per state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeStep {
    pub delta: f64,
    /// Mean of the fitted steps over the sample states.
    pub step: f64,
    /// Largest deviation of a per-state fit from `step`.
    pub spread: f64,
    /// Largest `|ψ_{Δ'}(s) − ψ_Δ(ψ_Δ(s))|` at the fitted step.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub scheme: String,
    pub config: AuditConfig,
    pub checks: Vec<AuditCheck>,
    pub composite_steps: Vec<CompositeStep>,
}

impl AuditReport {
    pub fn check(&self, name: &str, delta: Option<f64>) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name && c.delta == delta)
    }

    /// Whether every check named `name` passed.
    pub fn passes(&self, name: &str) -> bool {
        let mut any = false;
        for c in self.checks.iter().filter(|c| c.name == name) {
            any = true;
            if !c.pass {
                return false;
            }
        }
        any
    }
}

fn measure(
    name: &str,
    delta: Option<f64>,
    tol: f64,
    states: &[PhaseState],
    f: impl Fn(&PhaseState) -> crate::Result<f64>,
) -> AuditCheck {
    let mut worst = 0.0f64;
    for s in states {
        match f(s) {
            Ok(v) => worst = worst.max(v),
            Err(e) => {
                return AuditCheck {
                    name: name.into(),
                    delta,
                    measured: f64::NAN,
                    pass: false,
                    error: Some(e.to_string()),
                }
            }
        }
    }
    AuditCheck {
        name: name.into(),
        delta,
        measured: worst,
        pass: worst <= tol,
        error: None,
    }
}

/// Gauss-Newton on the scalar step `Δ'` minimizing `|ψ_{Δ'}(s) − target|²`.
fn fit_step(scheme: &dyn Scheme, s: &PhaseState, target: &[f64], start: f64) -> crate::Result<(f64, f64)> {
    let residual = |d: f64| -> crate::Result<Vec<f64>> {
        let c = scheme.step(s, d)?.coords();
        Ok(c.iter().zip(target).map(|(a, b)| a - b).collect())
    };
    let mut d = start;
    for _ in 0..60 {
        let r = residual(d)?;
        let h = 1e-6 * d.abs().max(1e-3);
        let slope = match scheme.d_delta(s, d) {
            Some(v) => v?,
            None => {
                let (rp, rm) = (residual(d + h)?, residual(d - h)?);
                rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
            }
        };
        let jj: f64 = slope.iter().map(|v| v * v).sum();
        if jj == 0.0 {
            break;
        }
        let jr: f64 = slope.iter().zip(&r).map(|(a, b)| a * b).sum();
        let step = jr / jj;
        d -= step;
        if step.abs() <= 4.0 * f64::EPSILON * d.abs().max(1.0) {
            break;
        }
    }
    let r = residual(d)?;
    Ok((d, r.iter().fold(0.0f64, |m, v| m.max(v.abs()))))
}

/// Runs every check on `states` at each step in `deltas`. Failures are
/// recorded in the report rather than returned.
pub fn audit_scheme(
    scheme: &dyn Scheme,
    sys: &HamiltonianSystem,
    states: &[PhaseState],
    deltas: &[f64],
    config: &AuditConfig,
) -> AuditReport {
    let tol = config.tolerance;
    let mut checks = vec![measure("identity", None, tol, states, |s| {
        Ok(scheme.step(s, 0.0)?.max_abs_diff(s))
    })];
    let mut composite_steps = Vec::new();
    for &d in deltas {
        checks.push(measure("inverse", Some(d), tol, states, |s| {
            Ok(scheme.step(&scheme.step(s, d)?, -d)?.max_abs_diff(s))
        }));
        checks.push(measure("group-law", Some(d), tol, states, |s| {
            let twice = scheme.step(&scheme.step(s, d)?, d)?;
            Ok(twice.max_abs_diff(&scheme.step(s, 2.0 * d)?))
        }));
        checks.push(measure("symplectic", Some(d), tol, states, |s| {
            symplectic_defect(&refined_jacobian(scheme, s, d, config.jacobian_step)?)
        }));
        checks.push(measure("energy-drift", Some(d), tol, states, |s| {
            Ok((sys.energy(&scheme.step(s, d)?) - sys.energy(s)).abs())
        }));
        let fits: crate::Result<Vec<(f64, f64)>> = states
            .iter()
            .map(|s| {
                let target = scheme.step(&scheme.step(s, d)?, d)?.coords();
                fit_step(scheme, s, &target, 2.0 * d)
            })
            .collect();
        if let Ok(fits) = fits {
            if !fits.is_empty() {
                let step = fits.iter().map(|f| f.0).sum::<f64>() / fits.len() as f64;
                composite_steps.push(CompositeStep {
                    delta: d,
                    step,
                    spread: fits.iter().fold(0.0f64, |m, f| m.max((f.0 - step).abs())),
                    residual: fits.iter().fold(0.0f64, |m, f| m.max(f.1)),
                });
            }
        }
    }
    let h = config.consistency_step;
    checks.push(measure("consistency", Some(h), config.consistency_tolerance, states, |s| {
        let out = scheme.step(s, h)?.coords();
        let g = evolution_generator(sys, s)?.stacked();
        Ok(out
            .iter()
            .zip(s.coords())
            .zip(&g)
            .fold(0.0f64, |m, ((a, b), gi)| m.max(((a - b) / h - gi).abs())))
    }));
    AuditReport {
        scheme: scheme.name().to_string(),
        config: config.clone(),
        checks,
        composite_steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_lab::square_grid;
    use crate::scheme::{discrete_gradient_ho_scheme, euler_scheme, exact_ho_scheme};
    use crate::system::make_harmonic_oscillator;

    fn states() -> Vec<PhaseState> {
        square_grid(-1.5, 1.5, 4)
    }

    #[test]
    fn exact_scheme_passes_everything() {
        let ho = make_harmonic_oscillator();
        let r = audit_scheme(&exact_ho_scheme(), &ho, &states(), &[0.1, 0.3], &AuditConfig::default());
        for c in &r.checks {
            assert!(c.pass, "{c:?}");
        }
        for c in &r.composite_steps {
            assert!((c.step - 2.0 * c.delta).abs() < 1e-10);
        }
    }

    #[test]
    fn euler_profile() {
        let ho = make_harmonic_oscillator();
        let r = audit_scheme(&euler_scheme(&ho), &ho, &states(), &[0.1, 0.3], &AuditConfig::default());
        for d in [0.1, 0.3] {
            let sym = r.check("symplectic", Some(d)).unwrap();
            assert!((sym.measured - d * d).abs() < 1e-8, "{sym:?}");
            assert!(!r.check("group-law", Some(d)).unwrap().pass);
        }
        assert!(r.passes("consistency"));
        assert!(r.passes("identity"));
        assert!(!r.passes("inverse"));
    }

    #[test]
    fn discrete_gradient_profile() {
        let ho = make_harmonic_oscillator();
        let r = audit_scheme(
            &discrete_gradient_ho_scheme(),
            &ho,
            &states(),
            &[0.1, 0.3],
            &AuditConfig::default(),
        );
        assert!(r.passes("symplectic"));
        assert!(r.passes("inverse"));
        assert!(r.passes("energy-drift"));
        assert!(r.check("group-law", Some(0.3)).unwrap().measured > 1e-6);
        for c in &r.composite_steps {
            let want = 8.0 * c.delta / (4.0 - c.delta * c.delta);
            assert!((c.step - want).abs() < 1e-10, "{c:?}");
            assert!(c.residual < 1e-12 && c.spread < 1e-10);
        }
    }
}
