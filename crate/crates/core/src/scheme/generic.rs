//! Schemes that work for any [`HamiltonianSystem`].

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::lie::{evolution_generator, lie_derivatives};
use crate::scheme::Scheme;
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;

/// `Q = q + Δ ∂H/∂p`, `P = p − Δ ∂H/∂q`.
#[derive(Debug, Clone)]
pub struct EulerScheme {
    sys: HamiltonianSystem,
}

pub fn euler_scheme(sys: &HamiltonianSystem) -> EulerScheme {
    EulerScheme { sys: sys.clone() }
}

impl Scheme for EulerScheme {
    fn name(&self) -> &str {
        "euler"
    }

    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn claimed_order(&self) -> usize {
        1
    }

    fn group_linear(&self) -> bool {
        false
    }

    fn step(&self, s: &PhaseState, delta: f64) -> Result<PhaseState> {
        let g = evolution_generator(&self.sys, s)?;
        let q = s.q().iter().zip(&g.xi).map(|(a, b)| a + delta * b).collect();
        let p = s.p().iter().zip(&g.eta).map(|(a, b)| a + delta * b).collect();
        PhaseState::raw(q, p, s.t() + delta).checked("euler")
    }

    fn d_delta(&self, s: &PhaseState, _delta: f64) -> Option<Result<Vec<f64>>> {
        Some(evolution_generator(&self.sys, s).map(|g| g.stacked()))
    }

    fn has_analytic_d_delta(&self) -> bool {
        true
    }

    fn delta_taylor(&self, s: &PhaseState, order: usize) -> Option<Result<Vec<Vec<f64>>>> {
        Some(evolution_generator(&self.sys, s).map(|g| {
            let zero = vec![0.0; 2 * s.dim()];
            let mut out = vec![s.coords()];
            for k in 1..=order {
                out.push(if k == 1 { g.stacked() } else { zero.clone() });
            }
            out
        }))
    }
}

/// Classical four-stage Runge–Kutta on the canonical equations.
#[derive(Debug, Clone)]
pub struct Rk4Scheme {
    sys: HamiltonianSystem,
}

pub fn generic_rk4_scheme(sys: &HamiltonianSystem) -> Rk4Scheme {
    Rk4Scheme { sys: sys.clone() }
}

type Gradient<'a, S> = dyn Fn(&[S], &[S]) -> (Vec<S>, Vec<S>) + 'a;

fn rk4_map<S: Scalar>(grad: &Gradient<'_, S>, q: &[S], p: &[S], h: &S) -> (Vec<S>, Vec<S>) {
    let rhs = |q: &[S], p: &[S]| {
        let (gq, gp) = grad(q, p);
        (gp, gq.into_iter().map(|v| -v).collect::<Vec<S>>())
    };
    let shift = |base: &[S], k: &[S], c: f64| -> Vec<S> {
        base.iter()
            .zip(k)
            .map(|(b, k)| b.clone() + h.scale(c) * k.clone())
            .collect()
    };
    let (k1q, k1p) = rhs(q, p);
    let (k2q, k2p) = rhs(&shift(q, &k1q, 0.5), &shift(p, &k1p, 0.5));
    let (k3q, k3p) = rhs(&shift(q, &k2q, 0.5), &shift(p, &k2p, 0.5));
    let (k4q, k4p) = rhs(&shift(q, &k3q, 1.0), &shift(p, &k3p, 1.0));
    let combine = |base: &[S], k1: &[S], k2: &[S], k3: &[S], k4: &[S]| -> Vec<S> {
        (0..base.len())
            .map(|i| {
                let sum = k1[i].clone() + k2[i].scale(2.0) + k3[i].scale(2.0) + k4[i].clone();
                base[i].clone() + h.scale(1.0 / 6.0) * sum
            })
            .collect()
    };
    (
        combine(q, &k1q, &k2q, &k3q, &k4q),
        combine(p, &k1p, &k2p, &k3p, &k4p),
    )
}

impl Rk4Scheme {
    fn expand(&self, s: &PhaseState, delta: f64, order: usize) -> Option<Result<Vec<Vec<f64>>>> {
        let jg = self.sys.jet_gradient()?;
        if let Err(e) = self.sys.check_dim(s) {
            return Some(Err(e));
        }
        let q: Vec<Jet> = s.q().iter().map(|&v| Jet::constant(v, order)).collect();
        let p: Vec<Jet> = s.p().iter().map(|&v| Jet::constant(v, order)).collect();
        let h = Jet::variable(delta, order);
        let (qs, ps) = rk4_map(&|a: &[Jet], b: &[Jet]| jg(a, b), &q, &p, &h);
        Some(Ok((0..=order)
            .map(|k| qs.iter().chain(&ps).map(|j| j.coeff(k)).collect())
            .collect()))
    }
}

impl Scheme for Rk4Scheme {
    fn name(&self) -> &str {
        "rk4"
    }

    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn claimed_order(&self) -> usize {
        4
    }

    fn group_linear(&self) -> bool {
        false
    }

    fn step(&self, s: &PhaseState, delta: f64) -> Result<PhaseState> {
        self.sys.check_dim(s)?;
        let sys = &self.sys;
        let t = s.t();
        let grad = |q: &[f64], p: &[f64]| {
            let pt = PhaseState::raw(q.to_vec(), p.to_vec(), t);
            (sys.grad_q(&pt), sys.grad_p(&pt))
        };
        let (q, p) = rk4_map(&grad, s.q(), s.p(), &delta);
        PhaseState::raw(q, p, t + delta).checked("rk4")
    }

    fn d_delta(&self, s: &PhaseState, delta: f64) -> Option<Result<Vec<f64>>> {
        self.expand(s, delta, 1).map(|r| r.map(|mut c| c.swap_remove(1)))
    }

    fn has_analytic_d_delta(&self) -> bool {
        self.sys.jet_gradient().is_some()
    }

    fn delta_taylor(&self, s: &PhaseState, order: usize) -> Option<Result<Vec<Vec<f64>>>> {
        self.expand(s, 0.0, order)
    }
}

/// The truncated Lie series `Σ_{k≤K} Δᵏ/k! 𝔤ᵏ` as a scheme.
#[derive(Debug, Clone)]
pub struct LieSeriesScheme {
    sys: HamiltonianSystem,
    order: usize,
    name: String,
}

pub fn lie_series_scheme(sys: &HamiltonianSystem, order: usize) -> Result<LieSeriesScheme> {
    if order < 1 {
        return Err(Error::Parameter("Lie series order must be at least 1".into()));
    }
    Ok(LieSeriesScheme {
        sys: sys.clone(),
        order,
        name: format!("lie{order}"),
    })
}

impl Scheme for LieSeriesScheme {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn claimed_order(&self) -> usize {
        self.order
    }

    fn group_linear(&self) -> bool {
        false
    }

    fn step(&self, s: &PhaseState, delta: f64) -> Result<PhaseState> {
        crate::lie::lie_series_step(&self.sys, s, delta, self.order)
    }

    fn d_delta(&self, s: &PhaseState, delta: f64) -> Option<Result<Vec<f64>>> {
        Some(lie_derivatives(&self.sys, s, self.order).map(|terms| {
            let mut out = vec![0.0; 2 * s.dim()];
            let mut w = 1.0;
            for (k, term) in terms.iter().enumerate().skip(1) {
                if k > 1 {
                    w *= delta / (k - 1) as f64;
                }
                for (o, t) in out.iter_mut().zip(term) {
                    *o += w * t;
                }
            }
            out
        }))
    }

    fn has_analytic_d_delta(&self) -> bool {
        true
    }

    fn delta_taylor(&self, s: &PhaseState, order: usize) -> Option<Result<Vec<Vec<f64>>>> {
        Some(lie_derivatives(&self.sys, s, self.order.min(order)).map(|terms| {
            let mut fact = 1.0;
            let mut out: Vec<Vec<f64>> = terms
                .into_iter()
                .enumerate()
                .map(|(k, t)| {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    t.into_iter().map(|v| v / fact).collect()
                })
                .collect();
            out.resize(order + 1, vec![0.0; 2 * s.dim()]);
            out
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::rk4_ho_scheme;
    use crate::system::{make_harmonic_oscillator, make_pendulum};
    use approx::assert_relative_eq;

    fn st(x: f64, p: f64) -> PhaseState {
        PhaseState::one_d(x, p).unwrap()
    }

    #[test]
    fn euler_examples() {
        let ho = make_harmonic_oscillator();
        let e = euler_scheme(&ho);
        let out = e.step(&st(1.0, 0.0), 0.1).unwrap();
        assert_relative_eq!(out.q()[0], 1.0);
        assert_relative_eq!(out.p()[0], -0.1);
        let (x, p, d) = (0.6, -1.4, 0.2);
        let out = e.step(&st(x, p), d).unwrap();
        let r1 = out.q()[0].powi(2) + out.p()[0].powi(2);
        assert_relative_eq!(r1, (1.0 + d * d) * (x * x + p * p), epsilon = 1e-14);
    }

    #[test]
    fn generic_rk4_matches_oscillator_polynomial() {
        let ho = make_harmonic_oscillator();
        let a = generic_rk4_scheme(&ho);
        let b = rk4_ho_scheme();
        for &(x, p, d) in &[(1.0, 0.0, 0.1), (-0.3, 1.7, 0.37), (1.9, -1.2, -0.2)] {
            let sa = a.step(&st(x, p), d).unwrap();
            let sb = b.step(&st(x, p), d).unwrap();
            assert!(sa.max_abs_diff(&sb) < 1e-14);
        }
        let ta = a.delta_taylor(&st(0.4, 0.9), 6).unwrap().unwrap();
        let tb = b.delta_taylor(&st(0.4, 0.9), 6).unwrap().unwrap();
        for k in 0..=6 {
            assert!((ta[k][0] - tb[k][0]).abs() < 1e-15 && (ta[k][1] - tb[k][1]).abs() < 1e-15);
        }
    }

    #[test]
    fn pendulum_equilibrium_is_fixed() {
        let pend = make_pendulum();
        let out = generic_rk4_scheme(&pend).step(&st(0.0, 0.0), 0.3).unwrap();
        assert_eq!(out.coords(), vec![0.0, 0.0]);
    }

    #[test]
    fn rk4_d_delta_matches_finite_difference() {
        let pend = make_pendulum();
        let r = generic_rk4_scheme(&pend);
        let (s, d, h) = (st(0.9, -0.3), 0.2, 1e-5);
        let got = r.d_delta(&s, d).unwrap().unwrap();
        let a = r.step(&s, d + h).unwrap().coords();
        let b = r.step(&s, d - h).unwrap().coords();
        for i in 0..2 {
            assert!((got[i] - (a[i] - b[i]) / (2.0 * h)).abs() < 1e-8);
        }
    }

    #[test]
    fn lie_scheme_taylor_and_derivative() {
        let ho = make_harmonic_oscillator();
        let l4 = lie_series_scheme(&ho, 4).unwrap();
        let r = rk4_ho_scheme();
        let s = st(0.5, -0.7);
        assert!(l4.step(&s, 0.3).unwrap().max_abs_diff(&r.step(&s, 0.3).unwrap()) < 1e-15);
        let dl = l4.d_delta(&s, 0.3).unwrap().unwrap();
        let dr = r.d_delta(&s, 0.3).unwrap().unwrap();
        assert!((dl[0] - dr[0]).abs() < 1e-15 && (dl[1] - dr[1]).abs() < 1e-15);
        assert!(lie_series_scheme(&ho, 0).is_err());
    }
}
