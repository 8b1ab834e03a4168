//! Local-error fields `v_k`, the Taylor coefficients of `ψ_Δ − exp(Δ𝔤)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{lie_derivatives, VectorField, VectorFieldSample};
use crate::scheme::{Scheme, SharedScheme};
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMethod {
    /// Finite differences in `Δ` of `ψ_Δ(s) − exact_flow(s, Δ)`.
    FlowDifference,
    /// Read off the defect expansion.
    DefectRelations,
    /// Exact Taylor coefficients of the scheme minus the Lie series.
    TaylorCoefficients,
}

/// Error fields `v_2..v_K` at one base point (`v_0 = v_1 = 0` are implied).
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub base: PhaseState,
    pub order: usize,
    pub v: BTreeMap<usize, VectorFieldSample>,
    pub method: ErrorMethod,
}

impl ErrorSeries {
    pub fn get(&self, k: usize) -> Option<&VectorFieldSample> {
        self.v.get(&k)
    }
}

/// Deepest error field any route will produce.
pub const MAX_ERROR_ORDER: usize = 5;
/// Base node spacing of the flow-difference stencils.
pub const FLOW_DIFFERENCE_SPACING: f64 = 0.05;

fn check_order(order: usize) -> Result<()> {
    if !(2..=MAX_ERROR_ORDER).contains(&order) {
        return Err(Error::Parameter(format!(
            "error order must lie in 2..={MAX_ERROR_ORDER}, got {order}"
        )));
    }
    Ok(())
}

/// Finite-difference weights for the `m`-th derivative at 0 on `nodes`.
fn fornberg(nodes: &[f64], m: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// `k`-th derivative at 0 of `f` from a symmetric stencil with spacing `h`.
fn central_derivative(f: &dyn Fn(f64) -> Result<Vec<f64>>, k: usize, h: f64) -> Result<(Vec<f64>, usize)> {
    let half = k / 2 + 1;
    let offsets: Vec<f64> = (-(half as i64)..=half as i64).map(|j| j as f64).collect();
    let weights = fornberg(&offsets, k);
    let mut acc: Option<Vec<f64>> = None;
    for (o, w) in offsets.iter().zip(&weights) {
        if *w == 0.0 {
            continue;
        }
        let v = f(o * h)?;
        let a = acc.get_or_insert_with(|| vec![0.0; v.len()]);
        for (ai, vi) in a.iter_mut().zip(&v) {
            *ai += w * vi;
        }
    }
    let scale = h.powi(k as i32);
    let n = 2 * half + 1;
    // Leading truncation power of a symmetric stencil is even.
    let accuracy = (n - k).div_ceil(2) * 2;
    Ok((acc.unwrap_or_default().into_iter().map(|v| v / scale).collect(), accuracy))
}

/// `k`-th derivative at 0 with spacings `h`, `h/2`, `h/4` and two Richardson levels.
fn richardson_derivative(f: &dyn Fn(f64) -> Result<Vec<f64>>, k: usize, h: f64) -> Result<Vec<f64>> {
    let (a0, p) = central_derivative(f, k, h)?;
    let (a1, _) = central_derivative(f, k, 0.5 * h)?;
    let (a2, _) = central_derivative(f, k, 0.25 * h)?;
    let r1 = 2f64.powi(p as i32);
    let r2 = 2f64.powi(p as i32 + 2);
    let lvl1 = |fine: &[f64], coarse: &[f64]| -> Vec<f64> {
        fine.iter().zip(coarse).map(|(f, c)| (r1 * f - c) / (r1 - 1.0)).collect()
    };
    let b0 = lvl1(&a1, &a0);
    let b1 = lvl1(&a2, &a1);
    Ok(b1.iter().zip(&b0).map(|(f, c)| (r2 * f - c) / (r2 - 1.0)).collect())
}

/// `v_k(s)` as the `k`-th `Δ`-derivative at 0 of `ψ_Δ(s) − exact_flow(s, Δ)`.
pub fn flow_difference_errors(
    scheme: &dyn Scheme,
    sys: &HamiltonianSystem,
    s: &PhaseState,
    order: usize,
) -> Result<ErrorSeries> {
    check_order(order)?;
    if !sys.has_exact_flow() {
        return Err(Error::Capability(format!(
            "flow-difference error fields need the exact flow of '{}'",
            sys.label()
        )));
    }
    let w = |d: f64| -> Result<Vec<f64>> {
        let a = scheme.step(s, d)?.coords();
        let b = sys.exact_flow(s, d)?.coords();
        Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
    };
    let mut v = BTreeMap::new();
    for k in 2..=order {
        let d = richardson_derivative(&w, k, FLOW_DIFFERENCE_SPACING)?;
        v.insert(k, VectorFieldSample::from_stacked(&d, s.clone()));
    }
    Ok(ErrorSeries {
        base: s.clone(),
        order,
        v,
        method: ErrorMethod::FlowDifference,
    })
}

/// `v_k(s) = k!·[Δᵏ]ψ_Δ(s) − 𝔤ᵏ(coords)(s)`, exact to rounding when the
/// scheme expands in `Δ` and the system supports the needed Lie derivatives.
pub fn taylor_errors(
    scheme: &dyn Scheme,
    sys: &HamiltonianSystem,
    s: &PhaseState,
    order: usize,
) -> Result<ErrorSeries> {
    check_order(order)?;
    let coeffs = scheme.delta_taylor(s, order).ok_or_else(|| {
        Error::Capability(format!("scheme '{}' has no exact Δ-expansion", scheme.name()))
    })??;
    let lie = lie_derivatives(sys, s, order)?;
    let mut v = BTreeMap::new();
    let mut fact = 1.0;
    for k in 1..=order {
        fact *= k as f64;
        if k < 2 {
            continue;
        }
        let vk: Vec<f64> = coeffs[k].iter().zip(&lie[k]).map(|(c, l)| fact * c - l).collect();
        v.insert(k, VectorFieldSample::from_stacked(&vk, s.clone()));
    }
    Ok(ErrorSeries {
        base: s.clone(),
        order,
        v,
        method: ErrorMethod::TaylorCoefficients,
    })
}

/// Error fields read off the defect: `v_2 = d_1`; deeper orders are not
/// available this way without analytic coefficient fields.
pub fn defect_errors(scheme: &dyn Scheme, sys: &HamiltonianSystem, s: &PhaseState) -> Result<ErrorSeries> {
    let v2 = super::defect::recover_v2(scheme, sys, s)?;
    Ok(ErrorSeries {
        base: s.clone(),
        order: 2,
        v: BTreeMap::from([(2, v2)]),
        method: ErrorMethod::DefectRelations,
    })
}

/// Picks the most accurate available route: Taylor coefficients, then the
/// exact-flow difference.
pub fn best_errors(
    scheme: &dyn Scheme,
    sys: &HamiltonianSystem,
    s: &PhaseState,
    order: usize,
) -> Result<ErrorSeries> {
    match taylor_errors(scheme, sys, s, order) {
        Err(Error::Capability(_)) => flow_difference_errors(scheme, sys, s, order),
        other => other,
    }
}

/// `v_k` as a field that can be sampled anywhere, computed by `method`.
pub fn error_field(
    scheme: SharedScheme,
    sys: &HamiltonianSystem,
    k: usize,
    method: ErrorMethod,
) -> Result<VectorField> {
    check_order(k)?;
    if method == ErrorMethod::DefectRelations && k != 2 {
        return Err(Error::Capability(format!(
            "the defect route yields only v2 without analytic fields, asked for v{k}"
        )));
    }
    let sys = sys.clone();
    Ok(Arc::new(move |s: &PhaseState| {
        let series = match method {
            ErrorMethod::FlowDifference => flow_difference_errors(scheme.as_ref(), &sys, s, k)?,
            ErrorMethod::TaylorCoefficients => taylor_errors(scheme.as_ref(), &sys, s, k)?,
            ErrorMethod::DefectRelations => defect_errors(scheme.as_ref(), &sys, s)?,
        };
        Ok(series.v[&k].clone())
    }))
}
