//! The defect field `ψ₋Δ ∘ ∂_Δψ_Δ` and its expansion in `Δ`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::{evolution_generator, VectorField, VectorFieldSample};
use crate::scheme::Scheme;
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;

/// One sample of the defect field.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectSample {
    pub field: VectorFieldSample,
    pub delta: f64,
    pub scheme_name: String,
}

/// Step of the numeric `Δ`-derivative: `min(1e−4, |Δ|/10)`, or `1e−4` at `Δ = 0`.
pub fn delta_derivative_step(delta: f64) -> f64 {
    if delta == 0.0 {
        1e-4
    } else {
        (delta.abs() / 10.0).min(1e-4)
    }
}

/// `∂ψ_Δ(s)/∂Δ`, analytic when the scheme provides it, else a 4-point
/// central stencil.
pub fn delta_derivative(scheme: &dyn Scheme, s: &PhaseState, delta: f64) -> Result<Vec<f64>> {
    if let Some(d) = scheme.d_delta(s, delta) {
        return d;
    }
    let h = delta_derivative_step(delta);
    let at = |m: f64| scheme.step(s, delta + m * h).map(|x| x.coords());
    let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
    Ok((0..p1.len())
        .map(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h))
        .collect())
}

/// `D(s; Δ)`: the `Δ`-derivative of the step map evaluated at the pulled-back
/// point `ψ₋Δ(s)`. For the exact flow this is the evolution generator.
pub fn defect_field(scheme: &dyn Scheme, s: &PhaseState, delta: f64) -> Result<DefectSample> {
    let pulled = scheme.step(s, -delta)?.with_time(s.t());
    let d = delta_derivative(scheme, &pulled, delta)?;
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite Δ-derivative of {} at Δ = {delta}",
            scheme.name()
        )));
    }
    Ok(DefectSample {
        field: VectorFieldSample::from_stacked(&d, s.clone()),
        delta,
        scheme_name: scheme.name().to_string(),
    })
}

/// Symmetric fit nodes `±{0.02, 0.04, …, 0.12}`.
pub const FIT_NODES: [f64; 12] = [
    -0.12, -0.10, -0.08, -0.06, -0.04, -0.02, 0.02, 0.04, 0.06, 0.08, 0.10, 0.12,
];
const FIT_DEGREE: usize = 7;
const MAX_CONDITION: f64 = 1e10;
/// Deepest coefficient [`taylor_defect`] will extract.
pub const MAX_DEFECT_ORDER: usize = 5;

/// Coefficients `d_0..d_K` of `D(s; Δ) = Σ d_k Δᵏ` by least squares over
/// [`FIT_NODES`] with a degree-7 polynomial.
pub fn taylor_defect(scheme: &dyn Scheme, s: &PhaseState, order: usize) -> Result<Vec<VectorFieldSample>> {
    if order > MAX_DEFECT_ORDER {
        return Err(Error::Parameter(format!(
            "defect expansion limited to order {MAX_DEFECT_ORDER}, asked for {order}"
        )));
    }
    let scale = FIT_NODES[FIT_NODES.len() - 1];
    let rows = FIT_NODES.len();
    let vander = DMatrix::from_fn(rows, FIT_DEGREE + 1, |i, j| (FIT_NODES[i] / scale).powi(j as i32));
    let svd = vander.clone().svd(true, true);
    let (smax, smin) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::MAX), |(a, b), &v| (a.max(v), b.min(v)));
    if smin == 0.0 || smax / smin > MAX_CONDITION {
        return Err(Error::Numerical(format!(
            "defect fit is ill-conditioned (condition number {:e})",
            smax / smin
        )));
    }
    let samples: Vec<Vec<f64>> = FIT_NODES
        .iter()
        .map(|&d| defect_field(scheme, s, d).map(|x| x.field.stacked()))
        .collect::<Result<_>>()?;
    let m = samples[0].len();
    let mut coeffs = vec![vec![0.0; m]; order + 1];
    for comp in 0..m {
        let b = DVector::from_fn(rows, |i, _| samples[i][comp]);
        let c = svd
            .solve(&b, 1e-14)
            .map_err(|e| Error::Numerical(format!("defect fit failed: {e}")))?;
        for (k, row) in coeffs.iter_mut().enumerate() {
            row[comp] = c[k] / scale.powi(k as i32);
        }
    }
    Ok(coeffs
        .into_iter()
        .map(|c| VectorFieldSample::from_stacked(&c, s.clone()))
        .collect())
}

/// Tolerance on `d_0 = 𝔤` before error fields are read off the defect.
pub const CONSISTENCY_TOL: f64 = 1e-6;

fn consistent_defect(
    scheme: &dyn Scheme,
    sys: &HamiltonianSystem,
    s: &PhaseState,
    order: usize,
) -> Result<(Vec<VectorFieldSample>, VectorFieldSample)> {
    let d = taylor_defect(scheme, s, order)?;
    let g = evolution_generator(sys, s)?;
    let gap = d[0].max_abs_diff(&g);
    if gap > CONSISTENCY_TOL * g.norm_inf().max(1.0) {
        return Err(Error::Inconsistent(format!(
            "{}: leading defect differs from the evolution generator by {gap:e} at {:?}",
            scheme.name(),
            s.coords()
        )));
    }
    Ok((d, g))
}

/// `v_2 = d_1`, after checking `d_0 = 𝔤`.
pub fn recover_v2(scheme: &dyn Scheme, sys: &HamiltonianSystem, s: &PhaseState) -> Result<VectorFieldSample> {
    let (d, _) = consistent_defect(scheme, sys, s, 1)?;
    Ok(d[1].clone())
}

/// Jacobian-vector product `(∂F/∂x)·u` of a field by central differences.
fn field_jvp(field: &dyn Fn(&PhaseState) -> Result<Vec<f64>>, s: &PhaseState, u: &[f64]) -> Result<Vec<f64>> {
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(vec![0.0; u.len()]);
    }
    let h = 1e-5 * s.norm_inf().max(1.0) / norm;
    let c = s.coords();
    let at = |m: f64| {
        let pt: Vec<f64> = c.iter().zip(u).map(|(a, b)| a + m * h * b).collect();
        field(&PhaseState::raw_coords(&pt, s.t()))
    };
    let (p2, p1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
    Ok((0..c.len())
        .map(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h))
        .collect())
}

/// `v_3` from the `Δ²` coefficient of the defect, given `v_2` as a field:
/// `v_3 = 2 d_2 + 2 𝔤(v_2) − v_2(𝔤)`, where `A(B)` is `A` differentiating the
/// coefficients of `B` (a directional difference).
pub fn recover_v3(
    scheme: &dyn Scheme,
    sys: &HamiltonianSystem,
    s: &PhaseState,
    v2: &VectorField,
) -> Result<VectorFieldSample> {
    let (d, g) = consistent_defect(scheme, sys, s, 2)?;
    let v2s = v2(s)?.stacked();
    let gen = |x: &PhaseState| evolution_generator(sys, x).map(|g| g.stacked());
    let v2f = |x: &PhaseState| v2(x).map(|v| v.stacked());
    // 𝔤 differentiating the coefficients of v_2, and v_2 differentiating those of 𝔤.
    let g_on_v2 = field_jvp(&v2f, s, &g.stacked())?;
    let v2_on_g = field_jvp(&gen, s, &v2s)?;
    let d2 = d[2].stacked();
    let v3: Vec<f64> = (0..d2.len())
        .map(|i| 2.0 * d2[i] + 2.0 * g_on_v2[i] - v2_on_g[i])
        .collect();
    Ok(VectorFieldSample::from_stacked(&v3, s.clone()))
}
