//! Numerical action-angle chart for one-degree-of-freedom wells.
//!
//! The action is the energy itself, so the conjugate angle is the time of
//! flight measured from the crossing of the well center with `p > 0`; its
//! frequency is exactly one and its period is the orbit period `T(E)`.
//! Times of flight come from `∫ dq / ∂H/∂p` with `q = q_turn ± u²`, which
//! removes the inverse-square-root singularity at the turning points.

use std::f64::consts::TAU;

use crate::action_angle::{wrap_centered, ActionAngleChart, AngleAction, Branch};
use crate::error::{Error, PipelineFailure, Result};
use crate::quad::integrate;
use crate::state::PhaseState;
use crate::system::HamiltonianSystem;

const QUAD_ABS_TOL: f64 = 1e-12;
const QUAD_REL_TOL: f64 = 1e-12;
const MAX_MARCH: f64 = 1e8;
/// Relative size of the `u` range near a turning point where the integrand
/// is extrapolated instead of evaluated.
const REGULAR_U: f64 = 1e-2;

/// Geometry of one energy level.
#[derive(Debug, Clone, Copy)]
struct Level {
    energy: f64,
    q_min: f64,
    q_max: f64,
    /// Time from `q_min` to `q_max` along the upper branch.
    half_period: f64,
    /// Time from `q_min` to the well center.
    tau_center: f64,
}

impl Level {
    fn period(&self) -> f64 {
        2.0 * self.half_period
    }

    fn width(&self) -> f64 {
        self.q_max - self.q_min
    }

    fn midpoint(&self) -> f64 {
        0.5 * (self.q_min + self.q_max)
    }
}

#[derive(Debug, Clone)]
pub struct NumericChart1d {
    sys: HamiltonianSystem,
    lo: f64,
    hi: f64,
    center: f64,
    name: String,
}

impl NumericChart1d {
    /// Chart on the energies `[lo, hi]` of the well centered at `q = 0`.
    pub fn new(sys: HamiltonianSystem, lo: f64, hi: f64) -> Result<Self> {
        Self::with_center(sys, lo, hi, 0.0)
    }

    pub fn with_center(sys: HamiltonianSystem, lo: f64, hi: f64, center: f64) -> Result<Self> {
        if sys.dim() != 1 {
            return Err(Error::Parameter(format!(
                "the numerical chart handles one degree of freedom, got {}",
                sys.dim()
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Parameter(format!("invalid energy window [{lo}, {hi}]")));
        }
        let slope = sys.grad_q(&PhaseState::raw(vec![center], vec![0.0], 0.0))[0];
        if slope.abs() > 1e-8 {
            return Err(Error::Parameter(format!(
                "q = {center} is not a critical point of the potential (slope {slope})"
            )));
        }
        Ok(NumericChart1d {
            name: format!("numeric[{}]", sys.label()),
            sys,
            lo,
            hi,
            center,
        })
    }

    pub fn window(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn h(&self, q: f64, p: f64) -> f64 {
        self.sys.energy(&PhaseState::raw(vec![q], vec![p], 0.0))
    }

    fn h_p(&self, q: f64, p: f64) -> f64 {
        self.sys.grad_p(&PhaseState::raw(vec![q], vec![p], 0.0))[0]
    }

    /// `|p|` solving `H(q, p) = E` on the upper branch.
    pub fn momentum(&self, q: f64, energy: f64) -> Result<f64> {
        let scale = energy.abs().max(1.0);
        let f0 = self.h(q, 0.0) - energy;
        if f0 > 0.0 {
            if f0 <= 1e-13 * scale {
                return Ok(0.0);
            }
            return Err(Error::pipeline(2, PipelineFailure::UnreachableEnergy { energy }));
        }
        if f0 == 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        let mut grown = 0;
        while self.h(q, hi) < energy {
            hi *= 2.0;
            grown += 1;
            if grown > 200 {
                return Err(Error::pipeline(2, PipelineFailure::NonMonotoneBranch { q }));
            }
        }
        let mut lo = 0.0;
        let mut p = 0.5 * hi;
        for _ in 0..200 {
            let f = self.h(q, p) - energy;
            if f == 0.0 {
                return Ok(p);
            }
            if f > 0.0 {
                hi = p;
            } else {
                lo = p;
            }
            let slope = self.h_p(q, p);
            if slope < 0.0 {
                return Err(Error::pipeline(2, PipelineFailure::NonMonotoneBranch { q }));
            }
            let newton = p - f / slope;
            let next = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - p).abs() <= 2.0 * f64::EPSILON * p || hi - lo <= 2.0 * f64::EPSILON * hi {
                return Ok(next);
            }
            p = next;
        }
        Ok(p)
    }

    /// Momentum on the given branch.
    pub fn momentum_on(&self, q: f64, energy: f64, branch: Branch) -> Result<f64> {
        Ok(branch.sign() * self.momentum(q, energy)?)
    }

    /// Turning point in direction `dir` (±1); returns the last allowed point.
    fn turning_point(&self, energy: f64, dir: f64) -> Result<f64> {
        let allowed = |q: f64| self.h(q, 0.0) <= energy;
        let mut a = self.center;
        let mut step = 0.05;
        loop {
            let b = a + dir * step;
            if !allowed(b) {
                let mut b = b;
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m == a || m == b {
                        break;
                    }
                    if allowed(m) {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                return Ok(a);
            }
            if !b.is_finite() || (b - self.center).abs() > MAX_MARCH {
                return Err(Error::pipeline(
                    3,
                    PipelineFailure::TurningPoint(format!(
                        "no turning point found in direction {dir} at energy {energy}"
                    )),
                ));
            }
            a = b;
            step *= 1.2;
        }
    }

    /// Both turning points `(q_min, q_max)` of the level.
    pub fn turning_points(&self, energy: f64) -> Result<(f64, f64)> {
        let l = self.level(energy)?;
        Ok((l.q_min, l.q_max))
    }

    /// `∫₀^{u_end} g(anchor + dir·u², u) du`, collecting integrand failures.
    fn u_integral(
        &self,
        energy: f64,
        anchor: f64,
        dir: f64,
        u_lo: f64,
        u_hi: f64,
        width: f64,
        step: u8,
        integrand: impl Fn(f64, f64) -> f64,
    ) -> Result<f64> {
        if u_hi <= u_lo {
            return Ok(0.0);
        }
        let raw = |u: f64| -> Result<f64> {
            let q = anchor + dir * u * u;
            Ok(integrand(q, self.momentum(q, energy)?) * u)
        };
        // Close to the turning point the momentum is lost to cancellation in
        // `E − H(q, 0)`; there the integrand, smooth in `u²`, is replaced by
        // its quadratic interpolant in `u²` through three points further out.
        let u_c = REGULAR_U * width.sqrt();
        let (r1, r2, r3) = (raw(u_c)?, raw(2.0 * u_c)?, raw(3.0 * u_c)?);
        let near = move |u: f64| {
            let x = u * u / (u_c * u_c);
            r1 * (x - 4.0) * (x - 9.0) / 24.0 - r2 * (x - 1.0) * (x - 9.0) / 15.0 + r3 * (x - 1.0) * (x - 4.0) / 40.0
        };
        let mut failure = None;
        let q = integrate(
            |u| {
                if u < u_c {
                    return near(u);
                }
                match raw(u) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            u_lo,
            u_hi,
            QUAD_ABS_TOL,
            QUAD_REL_TOL,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        match q {
            Ok(r) if r.value.is_finite() => Ok(r.value),
            Ok(r) => Err(Error::pipeline(step, PipelineFailure::Quadrature(format!("non-finite value {}", r.value)))),
            Err(e) => Err(Error::pipeline(step, PipelineFailure::Quadrature(e.to_string()))),
        }
    }

    /// Time of flight from `anchor` (a turning point) to `q`.
    fn flight(&self, l: &Level, from_left: bool, q: f64) -> Result<f64> {
        let (anchor, dir) = if from_left { (l.q_min, 1.0) } else { (l.q_max, -1.0) };
        let u_end = (dir * (q - anchor)).max(0.0).sqrt();
        self.u_integral(l.energy, anchor, dir, 0.0, u_end, l.width(), 4, |q, p| 2.0 / self.h_p(q, p))
    }

    fn level(&self, energy: f64) -> Result<Level> {
        if !(energy >= self.lo && energy <= self.hi) {
            return Err(Error::pipeline(
                1,
                PipelineFailure::OutsideWindow {
                    energy,
                    lo: self.lo,
                    hi: self.hi,
                },
            ));
        }
        if energy <= self.h(self.center, 0.0) {
            return Err(Error::pipeline(1, PipelineFailure::UnreachableEnergy { energy }));
        }
        let q_min = self.turning_point(energy, -1.0)?;
        let q_max = self.turning_point(energy, 1.0)?;
        let mut l = Level {
            energy,
            q_min,
            q_max,
            half_period: 0.0,
            tau_center: 0.0,
        };
        let mid = l.midpoint();
        l.half_period = self.flight(&l, true, mid)? + self.flight(&l, false, mid)?;
        l.tau_center = self.tau(&l, self.center)?;
        Ok(l)
    }

    /// Time from `q_min` to `q` on the upper branch.
    fn tau(&self, l: &Level, q: f64) -> Result<f64> {
        let q = q.clamp(l.q_min, l.q_max);
        if q <= l.midpoint() {
            self.flight(l, true, q)
        } else {
            Ok(l.half_period - self.flight(l, false, q)?)
        }
    }

    /// Orbit period `T(E)`.
    pub fn period(&self, energy: f64) -> Result<f64> {
        Ok(self.level(energy)?.period())
    }

    /// Angular frequency `2π / T(E)` of the orbit.
    pub fn angular_frequency(&self, energy: f64) -> Result<f64> {
        Ok(TAU / self.period(energy)?)
    }

    /// Time of flight from the well center (upper branch) to `q`.
    pub fn time_from_center(&self, q: f64, energy: f64) -> Result<f64> {
        let l = self.level(energy)?;
        Ok(self.tau(&l, q)? - l.tau_center)
    }

    /// Solves `τ(q) = target` on `[q_min, q_max]`.
    fn invert(&self, l: &Level, target: f64) -> Result<f64> {
        let (mut a, mut b) = (l.q_min, l.q_max);
        if target <= 0.0 {
            return Ok(a);
        }
        if target >= l.half_period {
            return Ok(b);
        }
        let tol = 1e-13 * l.period().max(1.0);
        let mut q = a + (b - a) * target / l.half_period;
        for _ in 0..200 {
            let f = self.tau(l, q)? - target;
            if f.abs() <= tol {
                return Ok(q);
            }
            if f > 0.0 {
                b = q;
            } else {
                a = q;
            }
            let p = self.momentum(q, l.energy)?;
            let newton = q - f * self.h_p(q, p);
            let next = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if b - a <= 4.0 * f64::EPSILON * q.abs().max(1.0) {
                return Ok(next);
            }
            q = next;
        }
        Err(Error::pipeline(
            5,
            PipelineFailure::Inversion(format!("no convergence for time {target} at energy {}", l.energy)),
        ))
    }
}

impl ActionAngleChart for NumericChart1d {
    fn name(&self) -> &str {
        &self.name
    }

    fn system(&self) -> &HamiltonianSystem {
        &self.sys
    }

    fn to_action_angle(&self, s: &PhaseState) -> Result<AngleAction> {
        self.sys.check_dim(s)?;
        let energy = self.sys.energy(s);
        let l = self.level(energy)?;
        let (q, p) = (s.q()[0], s.p()[0]);
        let tau = self.tau(&l, q)?;
        let since_left = if p >= 0.0 { tau } else { l.period() - tau };
        Ok(AngleAction {
            angle: vec![wrap_centered(since_left - l.tau_center, l.period())],
            action: vec![energy],
        })
    }

    fn from_action_angle(&self, aa: &AngleAction) -> Result<PhaseState> {
        let l = self.level(aa.action[0])?;
        let since_left = (aa.angle[0] + l.tau_center).rem_euclid(l.period());
        let (target, branch) = if since_left <= l.half_period {
            (since_left, Branch::Upper)
        } else {
            (l.period() - since_left, Branch::Lower)
        };
        let q = self.invert(&l, target)?;
        let p = self
            .momentum_on(q, l.energy, branch)
            .map_err(|e| Error::pipeline(5, PipelineFailure::Inversion(e.to_string())))?;
        PhaseState::one_d(q, p)
    }

    fn closed_form_frequencies(&self, _action: &[f64]) -> Option<Vec<f64>> {
        Some(vec![1.0])
    }

    fn angle_periods(&self, action: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.period(action[0])?])
    }
}

/// `K(q, E) = ε ∫_{q_min}^{q} |p(q', E)| dq'`, the generating function of
/// the chart on one momentum branch.
#[derive(Debug, Clone, Copy)]
pub struct GeneratingFunction<'a> {
    chart: &'a NumericChart1d,
    branch: Branch,
}

impl<'a> GeneratingFunction<'a> {
    pub fn new(chart: &'a NumericChart1d, branch: Branch) -> Self {
        GeneratingFunction { chart, branch }
    }

    pub fn value(&self, q: f64, energy: f64) -> Result<f64> {
        let c = self.chart;
        let l = c.level(energy)?;
        if q < l.q_min || q > l.q_max {
            return Err(Error::pipeline(
                3,
                PipelineFailure::TurningPoint(format!(
                    "q = {q} lies outside [{}, {}] at energy {energy}",
                    l.q_min, l.q_max
                )),
            ));
        }
        let mid = l.midpoint();
        let area = |q: f64, p: f64| {
            let _ = q;
            2.0 * p
        };
        let k = if q <= mid {
            c.u_integral(energy, l.q_min, 1.0, 0.0, (q - l.q_min).sqrt(), l.width(), 3, area)?
        } else {
            c.u_integral(energy, l.q_min, 1.0, 0.0, (mid - l.q_min).sqrt(), l.width(), 3, area)?
                + c.u_integral(energy, l.q_max, -1.0, (l.q_max - q).sqrt(), (l.q_max - mid).sqrt(), l.width(), 3, area)?
        };
        Ok(self.branch.sign() * k)
    }

    /// `∂K/∂E` by a central difference with step `10⁻⁶·E`.
    pub fn d_energy(&self, q: f64, energy: f64) -> Result<f64> {
        let h = 1e-6 * energy.abs().max(1e-300);
        Ok((self.value(q, energy + h)? - self.value(q, energy - h)?) / (2.0 * h))
    }

    /// `∂K/∂q = p` on this branch.
    pub fn momentum(&self, q: f64, energy: f64) -> Result<f64> {
        self.chart.momentum_on(q, energy, self.branch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action_angle::{exact_scheme_from_chart, frequencies, HoChart};
    use crate::scheme::{exact_ho_scheme, Scheme};
    use crate::system::{make_custom_system, make_harmonic_oscillator, make_pendulum, make_quartic_oscillator};
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn st(x: f64, p: f64) -> PhaseState {
        PhaseState::one_d(x, p).unwrap()
    }

    fn ho_chart() -> NumericChart1d {
        NumericChart1d::new(make_harmonic_oscillator(), 0.01, 10.0).unwrap()
    }

    #[test]
    fn oscillator_period_and_angle() {
        let c = ho_chart();
        assert!((c.period(0.5).unwrap() - TAU).abs() < 1e-10);
        let (a, b) = c.turning_points(0.5).unwrap();
        assert!((a + 1.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);
        let closed = HoChart::new();
        for &(x, p) in &[(1.0, 0.0), (0.3, 0.9), (-0.8, -0.1), (0.2, -1.7), (-1.1, 0.6)] {
            let s = st(x, p);
            let got = c.to_action_angle(&s).unwrap().angle[0];
            let want = closed.to_action_angle(&s).unwrap().angle[0];
            assert!(wrap_centered(got - want, TAU).abs() < 1e-9, "({x}, {p}): {got} vs {want}");
        }
    }

    #[test]
    fn oscillator_generating_function() {
        let c = ho_chart();
        let e: f64 = 0.5;
        let r = (2.0 * e).sqrt();
        for branch in [Branch::Upper, Branch::Lower] {
            let k = GeneratingFunction::new(&c, branch);
            let eps = branch.sign();
            for &x in &[-0.9f64, -0.2, 0.0, 0.4, 0.95] {
                // Antiderivative normalized to vanish at the center, plus its value there.
                let centered = eps * (0.5 * x * (2.0 * e - x * x).sqrt() + e * (x / r).asin());
                let want = centered + eps * e * PI / 2.0;
                assert!((k.value(x, e).unwrap() - want).abs() < 1e-10, "x = {x}");
                assert!((k.momentum(x, e).unwrap() - eps * (2.0 * e - x * x).sqrt()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn energy_derivative_is_flight_time() {
        let c = NumericChart1d::new(make_pendulum(), 0.01, 1.9).unwrap();
        let k = GeneratingFunction::new(&c, Branch::Upper);
        let e = 0.8;
        let (a, _) = c.turning_points(e).unwrap();
        for &q in &[-0.5, 0.0, 0.7] {
            let want = c.time_from_center(q, e).unwrap() - c.time_from_center(a, e).unwrap();
            assert!((k.d_energy(q, e).unwrap() - want).abs() < 1e-5, "q = {q}");
        }
    }

    #[test]
    fn pendulum_small_angle_frequency() {
        let c = NumericChart1d::new(make_pendulum(), 1e-4, 1.9).unwrap();
        let s = st(0.1, 0.0);
        let e = make_pendulum().energy(&s);
        let nu = frequencies(&c, &s).unwrap();
        assert!((nu[0] - 1.0).abs() < 2e-3);
        // The small-amplitude expansion `ω ≈ 1 − a²/16`.
        let omega = c.angular_frequency(e).unwrap();
        assert!((omega - (1.0 - 0.01 / 16.0)).abs() < 1e-5);
        assert!((omega - 1.0).abs() < 2e-3);
    }

    #[test]
    fn pendulum_period_matches_elliptic_integral() {
        // T = 4 K(k), k = sin(a/2), via the arithmetic-geometric mean.
        let a: f64 = 2.0;
        let k = (a / 2.0).sin();
        let (mut x, mut y) = (1.0f64, (1.0 - k * k).sqrt());
        for _ in 0..30 {
            let (nx, ny) = (0.5 * (x + y), (x * y).sqrt());
            x = nx;
            y = ny;
        }
        let period = 4.0 * PI / (2.0 * x);
        let c = NumericChart1d::new(make_pendulum(), 0.01, 1.99).unwrap();
        assert!((c.period(1.0 - a.cos()).unwrap() - period).abs() < 1e-9);
    }

    #[test]
    fn assembled_scheme_reproduces_rotation() {
        let seed = st(1.0, 0.0);
        let sch = exact_scheme_from_chart(Arc::new(ho_chart()), &seed).unwrap();
        let exact = exact_ho_scheme();
        let (mut a, mut b) = (seed.clone(), seed);
        for _ in 0..60 {
            a = sch.step(&a, 0.1).unwrap();
            b = exact.step(&b, 0.1).unwrap();
        }
        assert!(a.max_abs_diff(&b) < 1e-8);
        assert!((a.t() - b.t()).abs() < 1e-12);
    }

    #[test]
    fn seed_outside_window() {
        let c = NumericChart1d::new(make_harmonic_oscillator(), 1.0, 2.0).unwrap();
        match exact_scheme_from_chart(Arc::new(c), &st(1.0, 0.0)) {
            Err(Error::Pipeline { step: 7, reason: PipelineFailure::OutsideWindow { .. } }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn leaving_the_window_is_a_domain_error() {
        let c = NumericChart1d::new(make_harmonic_oscillator(), 0.1, 1.0).unwrap();
        let sch = exact_scheme_from_chart(Arc::new(c), &st(1.0, 0.0)).unwrap();
        assert!(matches!(sch.step(&st(2.0, 0.0), 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn unbounded_level_has_no_turning_point() {
        let c = NumericChart1d::new(make_pendulum(), 0.1, 3.0).unwrap();
        assert!(matches!(
            c.to_action_angle(&st(0.0, 2.2)),
            Err(Error::Pipeline { step: 3, .. })
        ));
    }

    #[test]
    fn non_monotone_momentum() {
        let sys = make_custom_system(
            "bent",
            Arc::new(|s: &PhaseState| {
                let (q, p) = (s.q()[0], s.p()[0]);
                0.5 * q * q + p * p - 0.5 * p.powi(4) + 0.05 * p.powi(6)
            }),
            1,
            None,
        )
        .unwrap();
        let c = NumericChart1d::new(sys, 0.1, 5.0).unwrap();
        let r = (0..40)
            .map(|i| c.momentum(0.0, 0.3 + 0.1 * i as f64))
            .find(|r| r.is_err());
        assert!(matches!(
            r,
            Some(Err(Error::Pipeline { step: 2, reason: PipelineFailure::NonMonotoneBranch { .. } }))
        ));
    }

    #[test]
    fn quartic_round_trip() {
        let c = NumericChart1d::new(make_quartic_oscillator(), 0.01, 5.0).unwrap();
        for &(x, p) in &[(1.0, 0.0), (0.5, -0.8), (-1.2, 0.3), (0.0, 1.0)] {
            let s = st(x, p);
            let aa = c.to_action_angle(&s).unwrap();
            let back = c.from_action_angle(&aa).unwrap();
            assert!(back.max_abs_diff(&s) < 1e-9, "({x}, {p}) → {back:?}");
        }
    }

    #[test]
    fn generating_function_slope_is_momentum() {
        let c = NumericChart1d::new(make_pendulum(), 0.01, 1.9).unwrap();
        let e = 0.6;
        for branch in [Branch::Upper, Branch::Lower] {
            let k = GeneratingFunction::new(&c, branch);
            for &q in &[-0.6, 0.1, 0.8] {
                let h = 1e-4;
                let slope = (k.value(q + h, e).unwrap() - k.value(q - h, e).unwrap()) / (2.0 * h);
                assert!((slope - k.momentum(q, e).unwrap()).abs() < 1e-8, "q = {q}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn oscillator_chart_invariants(x in -1.8..1.8f64, p in -1.8..1.8f64, d in -2.0..2.0f64) {
            prop_assume!(0.5 * (x * x + p * p) > 0.02);
            let c = ho_chart();
            let s = st(x, p);
            let aa = c.to_action_angle(&s).unwrap();
            prop_assert!(c.from_action_angle(&aa).unwrap().max_abs_diff(&s) < 1e-9);
            let moved = make_harmonic_oscillator().exact_flow(&s, d).unwrap();
            let bb = c.to_action_angle(&moved).unwrap();
            prop_assert!((bb.action[0] - aa.action[0]).abs() < 1e-9);
            prop_assert!(wrap_centered(bb.angle[0] - aa.angle[0] - d, TAU).abs() < 1e-8);
        }

        #[test]
        fn chart_scheme_group_law(x in -1.5..1.5f64, p in -1.5..1.5f64, a in -1.0..1.0f64, b in -1.0..1.0f64) {
            prop_assume!(0.5 * (x * x + p * p) > 0.05);
            let s = st(x, p);
            let sch = exact_scheme_from_chart(Arc::new(ho_chart()), &s).unwrap();
            let two = sch.step(&sch.step(&s, a).unwrap(), b).unwrap();
            let one = sch.step(&s, a + b).unwrap();
            prop_assert!(two.max_abs_diff(&one) < 1e-5);
        }

        #[test]
        fn pendulum_round_trip(x in -1.5..1.5f64, p in -1.2..1.2f64) {
            let c = NumericChart1d::new(make_pendulum(), 1e-3, 1.95).unwrap();
            let s = st(x, p);
            prop_assume!(make_pendulum().energy(&s) > 1e-3 && make_pendulum().energy(&s) < 1.95);
            let aa = c.to_action_angle(&s).unwrap();
            let back = c.from_action_angle(&aa).unwrap();
            prop_assert!(back.max_abs_diff(&s) < 1e-8);
        }
    }
}
