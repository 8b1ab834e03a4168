//! Schemes with known local-error fields subtracted.

use crate::error::Result;
use crate::lie::VectorField;
use crate::scheme::{Scheme, SharedScheme};
use crate::state::PhaseState;

/// `ψ'_Δ(s) = ψ_Δ(s) − Σ_k Δᵏ/k! · v_k(s)`.
pub struct CorrectedScheme {
    base: SharedScheme,
    terms: Vec<(usize, VectorField)>,
    name: String,
    order: usize,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Subtracts the error fields `(k, v_k)` from `base`. The claimed order is
/// raised to the largest corrected `k`.
pub fn corrected_scheme(base: SharedScheme, mut terms: Vec<(usize, VectorField)>) -> CorrectedScheme {
    terms.sort_by_key(|(k, _)| *k);
    let mut name = base.name().to_string();
    for (k, _) in &terms {
        name.push_str(&format!("+v{k}"));
    }
    let order = terms
        .iter()
        .map(|(k, _)| *k)
        .fold(base.claimed_order(), usize::max);
    CorrectedScheme { base, terms, name, order }
}

impl CorrectedScheme {
    pub fn base(&self) -> &SharedScheme {
        &self.base
    }

    pub fn corrected_orders(&self) -> Vec<usize> {
        self.terms.iter().map(|(k, _)| *k).collect()
    }

    fn samples(&self, s: &PhaseState) -> Result<Vec<(usize, Vec<f64>)>> {
        self.terms
            .iter()
            .map(|(k, v)| Ok((*k, v(s)?.stacked())))
            .collect()
    }
}

impl Scheme for CorrectedScheme {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn claimed_order(&self) -> usize {
        self.order
    }

    fn group_linear(&self) -> bool {
        self.terms.is_empty() && self.base.group_linear()
    }

    fn step(&self, s: &PhaseState, delta: f64) -> Result<PhaseState> {
        let out = self.base.step(s, delta)?;
        if self.terms.is_empty() {
            return Ok(out);
        }
        let mut c = out.coords();
        for (k, v) in self.samples(s)? {
            let w = delta.powi(k as i32) / factorial(k);
            for (ci, vi) in c.iter_mut().zip(&v) {
                *ci -= w * vi;
            }
        }
        PhaseState::raw_coords(&c, out.t()).checked(&self.name)
    }

    fn d_delta(&self, s: &PhaseState, delta: f64) -> Option<Result<Vec<f64>>> {
        let base = self.base.d_delta(s, delta)?;
        Some(base.and_then(|mut d| {
            for (k, v) in self.samples(s)? {
                let w = if k == 0 { 0.0 } else { delta.powi(k as i32 - 1) / factorial(k - 1) };
                for (di, vi) in d.iter_mut().zip(&v) {
                    *di -= w * vi;
                }
            }
            Ok(d)
        }))
    }

    fn has_analytic_d_delta(&self) -> bool {
        self.base.has_analytic_d_delta()
    }

    fn delta_taylor(&self, s: &PhaseState, order: usize) -> Option<Result<Vec<Vec<f64>>>> {
        let base = self.base.delta_taylor(s, order)?;
        Some(base.and_then(|mut c| {
            for (k, v) in self.samples(s)? {
                if k <= order {
                    let f = factorial(k);
                    for (ci, vi) in c[k].iter_mut().zip(&v) {
                        *ci -= vi / f;
                    }
                }
            }
            Ok(c)
        }))
    }
}
