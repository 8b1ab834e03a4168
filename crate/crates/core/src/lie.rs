//! Evolution generator, Poisson brackets, Lie series and Jacobians of maps.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::jet::Jet;
use crate::scheme::Scheme;
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;

/// Components `(ξ, η)` of a vector field `Σ ξ_j ∂/∂q_j + η_j ∂/∂p_j` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldSample {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub at: PhaseState,
}

impl VectorFieldSample {
    pub fn new(xi: Vec<f64>, eta: Vec<f64>, at: PhaseState) -> Result<Self> {
        if xi.len() != at.dim() || eta.len() != at.dim() {
            return Err(Error::Parameter(format!(
                "vector field components ({}, {}) do not match dimension {}",
                xi.len(),
                eta.len(),
                at.dim()
            )));
        }
        Ok(VectorFieldSample { xi, eta, at })
    }

    pub fn zero(at: PhaseState) -> Self {
        let n = at.dim();
        VectorFieldSample {
            xi: vec![0.0; n],
            eta: vec![0.0; n],
            at,
        }
    }

    /// Splits stacked components `[ξ, η]`.
    pub fn from_stacked(c: &[f64], at: PhaseState) -> Self {
        let n = c.len() / 2;
        VectorFieldSample {
            xi: c[..n].to_vec(),
            eta: c[n..].to_vec(),
            at,
        }
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.xi.iter().chain(&self.eta).copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.xi.iter().chain(&self.eta).map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn dot(&self, other: &VectorFieldSample) -> f64 {
        self.xi
            .iter()
            .zip(&other.xi)
            .chain(self.eta.iter().zip(&other.eta))
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn sub(&self, other: &VectorFieldSample) -> VectorFieldSample {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &VectorFieldSample) -> VectorFieldSample {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, c: f64) -> VectorFieldSample {
        VectorFieldSample {
            xi: self.xi.iter().map(|v| v * c).collect(),
            eta: self.eta.iter().map(|v| v * c).collect(),
            at: self.at.clone(),
        }
    }

    /// Largest componentwise difference.
    pub fn max_abs_diff(&self, other: &VectorFieldSample) -> f64 {
        self.sub(other).norm_inf()
    }

    /// The directional derivative `ξ·∂φ/∂q + η·∂φ/∂p` of a scalar field.
    pub fn apply(&self, phi: &ScalarField) -> f64 {
        let (gq, gp) = phi.gradient(&self.at);
        self.xi
            .iter()
            .zip(&gq)
            .chain(self.eta.iter().zip(&gp))
            .map(|(a, b)| a * b)
            .sum()
    }

    fn zip_with(&self, other: &VectorFieldSample, f: impl Fn(f64, f64) -> f64) -> VectorFieldSample {
        VectorFieldSample {
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| f(*a, *b)).collect(),
            eta: self.eta.iter().zip(&other.eta).map(|(a, b)| f(*a, *b)).collect(),
            at: self.at.clone(),
        }
    }
}

/// A vector field that can be sampled anywhere on its domain.
pub type VectorField = Arc<dyn Fn(&PhaseState) -> Result<VectorFieldSample> + Send + Sync>;

/// Builds a [`VectorField`] from a closure returning stacked components.
pub fn field_from_fn(f: impl Fn(&PhaseState) -> Vec<f64> + Send + Sync + 'static) -> VectorField {
    Arc::new(move |s: &PhaseState| Ok(VectorFieldSample::from_stacked(&f(s), s.clone())))
}

/// `ξ = ∂H/∂p`, `η = −∂H/∂q`.
pub fn evolution_generator(sys: &HamiltonianSystem, s: &PhaseState) -> Result<VectorFieldSample> {
    sys.check_dim(s)?;
    let xi = sys.grad_p(s);
    let eta: Vec<f64> = sys.grad_q(s).into_iter().map(|v| -v).collect();
    if xi.iter().chain(&eta).any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite gradient of '{}' at {s:?}",
            sys.label()
        )));
    }
    Ok(VectorFieldSample { xi, eta, at: s.clone() })
}

/// The evolution generator as a sampleable field.
pub fn generator_field(sys: &HamiltonianSystem) -> VectorField {
    let sys = sys.clone();
    Arc::new(move |s: &PhaseState| evolution_generator(&sys, s))
}

/// `{f, g} = Σ_j ∂f/∂q_j ∂g/∂p_j − ∂g/∂q_j ∂f/∂p_j`.
pub fn poisson_bracket(f: &ScalarField, g: &ScalarField, s: &PhaseState) -> f64 {
    let (fq, fp) = f.gradient(s);
    let (gq, gp) = g.gradient(s);
    (0..s.dim()).map(|j| fq[j] * gp[j] - gq[j] * fp[j]).sum()
}

/// Deepest nested numeric differentiation accepted when no jets are available.
pub const MAX_NUMERIC_DEPTH: usize = 4;

/// `𝔤ᵏ` applied to the coordinate functions at `s`, for `k = 0..=order`.
///
/// Entry `k` holds the stacked values `[𝔤ᵏ q, 𝔤ᵏ p]`. Systems exposing jet
/// gradients are expanded exactly through Taylor-mode recurrences; otherwise
/// order 1 uses the gradients directly and orders up to
/// [`MAX_NUMERIC_DEPTH`] use nested central differences (analytic gradients
/// required).
pub fn lie_derivatives(sys: &HamiltonianSystem, s: &PhaseState, order: usize) -> Result<Vec<Vec<f64>>> {
    sys.check_dim(s)?;
    if let Some(jg) = sys.jet_gradient() {
        return Ok(jet_lie_derivatives(jg.as_ref(), s, order));
    }
    let mut out = vec![s.coords()];
    if order == 0 {
        return Ok(out);
    }
    out.push(evolution_generator(sys, s)?.stacked());
    if order == 1 {
        return Ok(out);
    }
    if !sys.has_analytic_gradients() {
        return Err(Error::Capability(format!(
            "order-{order} Lie derivatives of '{}' need analytic gradients",
            sys.label()
        )));
    }
    if order > MAX_NUMERIC_DEPTH {
        return Err(Error::Capability(format!(
            "order-{order} Lie derivatives of '{}' exceed the numeric depth limit {MAX_NUMERIC_DEPTH}",
            sys.label()
        )));
    }
    for k in 2..=order {
        out.push(nested_directional(sys, s, k)?);
    }
    Ok(out)
}

/// Taylor coefficients `y_k` of the exact flow through `s`; `𝔤ᵏ coords = k!·y_k`.
pub(crate) fn jet_flow_coefficients(
    jg: &dyn Fn(&[Jet], &[Jet]) -> (Vec<Jet>, Vec<Jet>),
    s: &PhaseState,
    order: usize,
) -> Vec<Vec<f64>> {
    let n = s.dim();
    let mut q: Vec<Jet> = s.q().iter().map(|&v| Jet::constant(v, order)).collect();
    let mut p: Vec<Jet> = s.p().iter().map(|&v| Jet::constant(v, order)).collect();
    for k in 0..order {
        let (gq, gp) = jg(&q, &p);
        let kk = (k + 1) as f64;
        for j in 0..n {
            q[j].set_coeff(k + 1, gp[j].coeff(k) / kk);
            p[j].set_coeff(k + 1, -gq[j].coeff(k) / kk);
        }
    }
    (0..=order)
        .map(|k| q.iter().chain(&p).map(|c| c.coeff(k)).collect())
        .collect()
}

fn jet_lie_derivatives(
    jg: &dyn Fn(&[Jet], &[Jet]) -> (Vec<Jet>, Vec<Jet>),
    s: &PhaseState,
    order: usize,
) -> Vec<Vec<f64>> {
    let mut fact = 1.0;
    jet_flow_coefficients(jg, s, order)
        .into_iter()
        .enumerate()
        .map(|(k, y)| {
            if k > 0 {
                fact *= k as f64;
            }
            y.into_iter().map(|v| v * fact).collect()
        })
        .collect()
}

// 𝔤ᵏ coords as the derivative of 𝔤ᵏ⁻¹ coords along 𝔤, by a 4-point stencil.
fn nested_directional(sys: &HamiltonianSystem, s: &PhaseState, k: usize) -> Result<Vec<f64>> {
    if k == 1 {
        return Ok(evolution_generator(sys, s)?.stacked());
    }
    let g = evolution_generator(sys, s)?.stacked();
    let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if gnorm == 0.0 {
        return Ok(vec![0.0; g.len()]);
    }
    let h = 1e-3 * s.norm_inf().max(1.0) / gnorm;
    let c = s.coords();
    let shifted = |m: f64| -> Result<Vec<f64>> {
        let pt: Vec<f64> = c.iter().zip(&g).map(|(a, b)| a + m * h * b).collect();
        nested_directional(sys, &PhaseState::raw_coords(&pt, s.t()), k - 1)
    };
    let (p2, p1, m1, m2) = (shifted(2.0)?, shifted(1.0)?, shifted(-1.0)?, shifted(-2.0)?);
    Ok((0..c.len())
        .map(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h))
        .collect())
}

/// The truncated Lie series `Σ_{k≤K} Δᵏ/k! 𝔤ᵏ` applied to the coordinates.
pub fn lie_series_step(sys: &HamiltonianSystem, s: &PhaseState, delta: f64, order: usize) -> Result<PhaseState> {
    if order < 1 {
        return Err(Error::Parameter("Lie series order must be at least 1".into()));
    }
    let terms = lie_derivatives(sys, s, order)?;
    let mut out = vec![0.0; 2 * s.dim()];
    let mut w = 1.0;
    for (k, term) in terms.iter().enumerate() {
        if k > 0 {
            w *= delta / k as f64;
        }
        for (o, t) in out.iter_mut().zip(term) {
            *o += w * t;
        }
    }
    PhaseState::raw_coords(&out, s.t() + delta).checked("Lie series step")
}

/// A `2N × 2N` Jacobian with rows and columns ordered `(q_1..q_N, p_1..p_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapJacobian {
    pub matrix: DMatrix<f64>,
    pub at: PhaseState,
    pub delta: f64,
}

impl MapJacobian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows() / 2
    }
}

/// Step of [`numeric_jacobian`].
pub const JACOBIAN_STEP: f64 = 1e-6;

fn jacobian_columns(
    map: &dyn Fn(&PhaseState) -> Result<PhaseState>,
    s: &PhaseState,
    h: f64,
) -> Result<DMatrix<f64>> {
    let c = s.coords();
    let m = c.len();
    let mut j = DMatrix::zeros(m, m);
    for col in 0..m {
        let mut plus = c.clone();
        let mut minus = c.clone();
        plus[col] += h;
        minus[col] -= h;
        let fp = map(&PhaseState::raw_coords(&plus, s.t()))?.coords();
        let fm = map(&PhaseState::raw_coords(&minus, s.t()))?.coords();
        for row in 0..m {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Central-difference Jacobian of `s ↦ ψ_Δ(s)` with step [`JACOBIAN_STEP`].
pub fn numeric_jacobian(scheme: &dyn Scheme, s: &PhaseState, delta: f64) -> Result<MapJacobian> {
    let matrix = jacobian_columns(&|x| scheme.step(x, delta), s, JACOBIAN_STEP)?;
    Ok(MapJacobian { matrix, at: s.clone(), delta })
}

/// Jacobian from central differences at steps `h` and `h/2` combined by one
/// Richardson level. Truncation error is `O(h⁴)` and rounding stays near
/// `ε/h`, so it is preferred for audits that compare against `1e−10`.
pub fn refined_jacobian(scheme: &dyn Scheme, s: &PhaseState, delta: f64, h: f64) -> Result<MapJacobian> {
    let coarse = jacobian_columns(&|x| scheme.step(x, delta), s, h)?;
    let fine = jacobian_columns(&|x| scheme.step(x, delta), s, 0.5 * h)?;
    let matrix = (fine * 4.0 - coarse) / 3.0;
    Ok(MapJacobian { matrix, at: s.clone(), delta })
}

/// The standard symplectic matrix `Ω = [[0, I], [−I, 0]]`.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        o[(i, n + i)] = 1.0;
        o[(n + i, i)] = -1.0;
    }
    o
}

/// `max |JᵀΩJ − Ω|`; zero for canonical maps.
pub fn symplectic_defect(j: &MapJacobian) -> Result<f64> {
    let m = &j.matrix;
    if m.nrows() != m.ncols() || m.nrows() % 2 != 0 {
        return Err(Error::Parameter(format!(
            "symplectic defect needs a square even-sized matrix, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let omega = symplectic_form(m.nrows() / 2);
    let d = m.transpose() * &omega * m - omega;
    Ok(d.iter().fold(0.0, |acc, v| acc.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{make_harmonic_oscillator, make_pendulum, SystemBuilder};
    use approx::assert_relative_eq;

    fn st(x: f64, p: f64) -> PhaseState {
        PhaseState::one_d(x, p).unwrap()
    }

    #[test]
    fn oscillator_generator() {
        let ho = make_harmonic_oscillator();
        let g = evolution_generator(&ho, &st(1.0, 0.0)).unwrap();
        assert_eq!((g.xi[0], g.eta[0]), (0.0, -1.0));
        let g = evolution_generator(&ho, &st(0.0, 1.0)).unwrap();
        assert_eq!((g.xi[0], g.eta[0]), (1.0, 0.0));
        let g = evolution_generator(&ho, &st(0.4, -2.2)).unwrap();
        assert_eq!((g.xi[0], g.eta[0]), (-2.2, -0.4));
    }

    #[test]
    fn canonical_brackets() {
        let q = ScalarField::new("q", |s| s.q()[0]);
        let p = ScalarField::new("p", |s| s.p()[0]);
        let ho = make_harmonic_oscillator();
        let h = ScalarField::energy(&ho);
        let s = st(0.3, -0.8);
        assert_relative_eq!(poisson_bracket(&q, &p, &s), 1.0, epsilon = 1e-9);
        assert_eq!(poisson_bracket(&h, &h, &s), 0.0);
    }

    #[test]
    fn ratio_bracket_with_energy() {
        // {x/p, H} = (1/p)·p − x·(−x/p²), differentiated by hand.
        let ho = make_harmonic_oscillator();
        let f = ScalarField::ratio_q_over_p(0, 0.1);
        let h = ScalarField::energy(&ho);
        let (x, p) = (1.0, 1.0);
        let oracle = (p * p + x * x) / (p * p);
        assert_relative_eq!(poisson_bracket(&f, &h, &st(x, p)), oracle, epsilon = 1e-12);
    }

    #[test]
    fn generator_annihilates_energy() {
        let ho = make_harmonic_oscillator();
        let h = ScalarField::energy(&ho);
        for &(x, p) in &[(1.0, 0.0), (-0.7, 1.9), (2.0, -2.0)] {
            let g = evolution_generator(&ho, &st(x, p)).unwrap();
            assert!(g.apply(&h).abs() < 1e-10);
        }
    }

    #[test]
    fn lie_series_orders() {
        let ho = make_harmonic_oscillator();
        let (x, p, d) = (0.6, -1.1, 0.3);
        let s1 = lie_series_step(&ho, &st(x, p), d, 1).unwrap();
        assert_relative_eq!(s1.q()[0], x + d * p, epsilon = 1e-15);
        assert_relative_eq!(s1.p()[0], p - d * x, epsilon = 1e-15);
        let s4 = lie_series_step(&ho, &st(x, p), d, 4).unwrap();
        let (d2, d3, d4) = (d * d / 2.0, d.powi(3) / 6.0, d.powi(4) / 24.0);
        assert_relative_eq!(s4.q()[0], x + d * p - d2 * x - d3 * p + d4 * x, epsilon = 1e-15);
        assert_relative_eq!(s4.p()[0], p - d * x - d2 * p + d3 * x + d4 * p, epsilon = 1e-15);
        let s0 = lie_series_step(&ho, &st(x, p), 0.0, 3).unwrap();
        assert_eq!(s0.coords(), vec![x, p]);
    }

    #[test]
    fn lie_series_truncation_ratio() {
        let ho = make_harmonic_oscillator();
        let s = st(0.8, 0.5);
        for k in 1..=4 {
            let ratios: Vec<f64> = [0.2, 0.1, 0.05]
                .iter()
                .map(|&d| {
                    let a = lie_series_step(&ho, &s, d, k).unwrap();
                    let e = ho.exact_flow(&s, d).unwrap();
                    a.max_abs_diff(&e) / d.powi(k as i32 + 1)
                })
                .collect();
            let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(l, h), r| (l.min(*r), h.max(*r)));
            assert!(hi / lo < 2.0, "order {k}: {ratios:?}");
        }
    }

    #[test]
    fn numeric_lie_derivatives_agree_with_jets() {
        let pend = make_pendulum();
        let grad_sys = SystemBuilder::new("pendulum-no-jets", 1, pend.energy_fn())
            .gradients(
                Arc::new(|s: &PhaseState| vec![s.q()[0].sin()]),
                Arc::new(|s: &PhaseState| vec![s.p()[0]]),
            )
            .build()
            .unwrap();
        let s = st(0.7, 0.4);
        let exact = lie_derivatives(&pend, &s, 4).unwrap();
        let numeric = lie_derivatives(&grad_sys, &s, 4).unwrap();
        for k in 0..=4 {
            for i in 0..2 {
                assert!((exact[k][i] - numeric[k][i]).abs() < 1e-6, "k={k} {exact:?} {numeric:?}");
            }
        }
        assert!(matches!(lie_derivatives(&grad_sys, &s, 5), Err(Error::Capability(_))));
        let fd_sys = SystemBuilder::new("pendulum-fd", 1, pend.energy_fn()).build().unwrap();
        assert!(lie_derivatives(&fd_sys, &s, 1).is_ok());
        assert!(matches!(lie_derivatives(&fd_sys, &s, 2), Err(Error::Capability(_))));
    }

    #[test]
    fn symplectic_form_of_scaled_rotation() {
        let d = 0.1;
        let j = MapJacobian {
            matrix: DMatrix::from_row_slice(2, 2, &[1.0, d, -d, 1.0]),
            at: st(0.0, 0.0),
            delta: d,
        };
        assert_relative_eq!(symplectic_defect(&j).unwrap(), d * d, epsilon = 1e-15);
    }
}
