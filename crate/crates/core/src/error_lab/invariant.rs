//! Invariants of error fields: `v∘φ = 0` checked on a grid of states.

use serde::Serialize;

use crate::error::Result;
use crate::field::ScalarField;
use crate::lie::VectorField;
use crate::state::PhaseState;

/// Relative tolerance of [`verify_error_invariant`].
pub const INVARIANT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub functional: String,
    /// `max |ξ·∂_qφ + η·∂_pφ|` over the evaluated states.
    pub max_residual: f64,
    /// `max(1, max |φ|)` over the evaluated states.
    pub scale: f64,
    pub pass: bool,
    pub evaluated: usize,
    /// States skipped because they lie in the singular band of `φ`.
    pub excluded: Vec<Vec<f64>>,
    /// A companion functional that is regular on the excluded states.
    pub suggestion: Option<String>,
}

/// Applies the field `v` to `φ` on every grid state outside `φ`'s singular set.
pub fn verify_error_invariant(v: &VectorField, phi: &ScalarField, grid: &[PhaseState]) -> Result<InvariantReport> {
    let mut max_residual = 0.0f64;
    let mut scale = 1.0f64;
    let mut evaluated = 0;
    let mut excluded = Vec::new();
    for s in grid {
        if phi.is_singular(s) {
            excluded.push(s.coords());
            continue;
        }
        let sample = v(s)?;
        max_residual = max_residual.max(sample.apply(phi).abs());
        scale = scale.max(phi.eval(s).abs());
        evaluated += 1;
    }
    let suggestion = if excluded.is_empty() {
        None
    } else {
        phi.reciprocal_hint().map(str::to_string)
    };
    Ok(InvariantReport {
        functional: phi.name().to_string(),
        max_residual,
        scale,
        pass: evaluated > 0 && max_residual <= INVARIANT_TOL * scale,
        evaluated,
        excluded,
        suggestion,
    })
}

/// A square grid of `n × n` one-dimensional states over `[lo, hi]²`.
pub fn square_grid(lo: f64, hi: f64, n: usize) -> Vec<PhaseState> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(PhaseState::raw(
                vec![lo + i as f64 * step],
                vec![lo + j as f64 * step],
                0.0,
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{field_from_fn, generator_field};
    use crate::system::make_harmonic_oscillator;

    #[test]
    fn scaling_field_annihilates_ratio() {
        let v2 = field_from_fn(|s| vec![s.q()[0], s.p()[0]]);
        let grid = square_grid(-2.0, 2.0, 9);
        let r = verify_error_invariant(&v2, &ScalarField::ratio_q_over_p(0, 0.1), &grid).unwrap();
        assert!(r.pass);
        assert!(r.max_residual <= 1e-12);
        assert_eq!(r.excluded.len(), 9);
        assert_eq!(r.suggestion.as_deref(), Some("p/x"));
    }

    #[test]
    fn scaling_field_moves_energy() {
        let ho = make_harmonic_oscillator();
        let v2 = field_from_fn(|s| vec![s.q()[0], s.p()[0]]);
        let s = PhaseState::one_d(1.2, -0.5).unwrap();
        let r = verify_error_invariant(&v2, &ScalarField::energy(&ho), &[s.clone()]).unwrap();
        assert!(!r.pass);
        // (x∂x + p∂p)(x² + p²)/2 = x² + p².
        assert!((r.max_residual - (1.44 + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn generator_multiple_preserves_energy() {
        let ho = make_harmonic_oscillator();
        let g = generator_field(&ho);
        let v3: VectorField = std::sync::Arc::new(move |s: &PhaseState| g(s).map(|x| x.scale(-0.5)));
        let r = verify_error_invariant(&v3, &ScalarField::energy(&ho), &square_grid(-2.0, 2.0, 7)).unwrap();
        assert!(r.pass && r.max_residual < 1e-14);
    }
}
