use std::sync::Arc;

use hamflow_core::action_angle::{exact_scheme_from_chart, frequencies, ActionAngleChart, NumericChart1d};
use hamflow_core::diagnostics::{attach_reference, run_trajectory, sigma_phase, uniform_steps};
use hamflow_core::error_lab::{reparametrize_time, square_grid};
use hamflow_core::field::SINGULAR_BAND;
use hamflow_core::scheme::{discrete_gradient_ho_scheme, euler_scheme, exact_ho_scheme, generic_rk4_scheme};
use hamflow_core::system::{make_harmonic_oscillator, make_quartic_oscillator};
use hamflow_core::{PhaseState, Scheme, ScalarField};

fn seed() -> PhaseState {
    PhaseState::one_d(1.0, 0.0).unwrap()
}

#[test]
fn discrete_gradient_angle_lags_by_deficit() {
    let ho = make_harmonic_oscillator();
    let dg = discrete_gradient_ho_scheme();
    let rep = reparametrize_time(Arc::new(discrete_gradient_ho_scheme()), &ho, &square_grid(-1.0, 1.0, 2)).unwrap();
    let w = rep.w(0.1).unwrap();
    let run = run_trajectory(&dg, "ho", &seed(), &uniform_steps(0.1, 200));
    let mut prev = std::f64::consts::FRAC_PI_2;
    let mut unwrapped = prev;
    for (n, s) in run.states.iter().enumerate().skip(1) {
        let a = s.q()[0].atan2(s.p()[0]);
        let mut d = a - prev;
        d -= std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
        unwrapped += d;
        prev = a;
        // The exact angle advances by nΔ; the scheme falls behind by nW.
        let exact = std::f64::consts::FRAC_PI_2 + 0.1 * n as f64;
        assert!((exact - unwrapped - n as f64 * w).abs() < 1e-8, "n = {n}");
    }
}

#[test]
fn euler_ratio_error_is_below_phase_error() {
    let ho = make_harmonic_oscillator();
    let mut run = run_trajectory(&euler_scheme(&ho), "ho", &seed(), &uniform_steps(0.1, 200));
    attach_reference(&mut run, &ho).unwrap();
    let ratio = ScalarField::ratio_q_over_p(0, SINGULAR_BAND);
    let rep = sigma_phase(&run, &[ratio]).unwrap();
    let f = rep.functional("x/p").unwrap();
    let mut checked = 0;
    for (i, s) in run.states.iter().enumerate() {
        if s.t() <= 5.0 + 1e-12 && s.p()[0].abs() >= 0.5 {
            let v = f.values[i].expect("not singular");
            assert!(v < rep.sigma_phase[i], "t = {}: {v} vs {}", s.t(), rep.sigma_phase[i]);
            checked += 1;
        }
    }
    assert!(checked > 10);
}

#[test]
fn exact_composition_matches_one_long_step() {
    let e = exact_ho_scheme();
    for &(x, p) in &[(1.0, 0.0), (-0.4, 1.3)] {
        let s = PhaseState::one_d(x, p).unwrap();
        let many = run_trajectory(&e, "ho", &s, &uniform_steps(0.1, 50));
        let one = e.step(&s, 5.0).unwrap();
        assert!(many.states.last().unwrap().max_abs_diff(&one) < 1e-10);
    }
}

#[test]
fn quartic_action_is_conserved_along_fine_rk4() {
    let quartic = make_quartic_oscillator();
    let chart = NumericChart1d::new(quartic.clone(), 0.01, 2.0).unwrap();
    let rk4 = generic_rk4_scheme(&quartic);
    let mut s = seed();
    let i0 = chart.to_action_angle(&s).unwrap().action[0];
    let mut drift = 0.0f64;
    for k in 1..=20_000 {
        s = rk4.step(&s, 1e-4).unwrap();
        if k % 1000 == 0 {
            drift = drift.max((chart.to_action_angle(&s).unwrap().action[0] - i0).abs());
        }
    }
    assert!(drift <= 1e-5, "{drift}");
}

#[test]
fn numeric_oscillator_chart_rebuilds_the_rotation() {
    let ho = make_harmonic_oscillator();
    let chart = NumericChart1d::new(ho.clone(), 0.01, 10.0).unwrap();
    for &(x, p) in &[(1.0, 1.0), (0.3, -2.0)] {
        let nu = frequencies(&chart, &PhaseState::one_d(x, p).unwrap()).unwrap();
        assert!((nu[0] - 1.0).abs() < 1e-6);
    }
    let sch = exact_scheme_from_chart(Arc::new(chart), &seed()).unwrap();
    let numeric = run_trajectory(&sch, "ho", &seed(), &uniform_steps(0.1, 200));
    let exact = run_trajectory(&exact_ho_scheme(), "ho", &seed(), &uniform_steps(0.1, 200));
    assert!(numeric.is_complete());
    for (a, b) in numeric.states.iter().zip(&exact.states) {
        assert!(a.max_abs_diff(b) < 1e-5);
    }
}
