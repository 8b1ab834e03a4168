//! Scheme ids accepted on the command line.
//!
//! `exact`, `euler`, `rk4`, `rk4-ho`, `dg`, `dg-reparam`, `lie<K>`,
//! `chart-exact`, and any of these followed by `+v<k>` terms, which subtract
//! the base scheme's error fields (`euler+v2+v3+v4`).

use std::sync::Arc;

use hamflow_core::action_angle::{exact_scheme_from_chart, HoChart, NumericChart1d, SharedChart};
use hamflow_core::error_lab::{error_field, reparametrize_time, square_grid, taylor_errors, ErrorMethod};
use hamflow_core::scheme::{
    corrected_scheme, discrete_gradient_ho_scheme, euler_scheme, exact_ho_scheme, generic_rk4_scheme,
    lie_series_scheme, rk4_ho_scheme,
};
use hamflow_core::{Error, HamiltonianSystem, PhaseState, SharedScheme};

use crate::error::{CliError, CliResult};

pub const OSCILLATOR_LABEL: &str = "harmonic-oscillator";

fn require_oscillator(id: &str, sys: &HamiltonianSystem) -> CliResult<()> {
    if sys.label() == OSCILLATOR_LABEL {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "scheme '{id}' is defined for the harmonic oscillator only, not '{}'",
            sys.label()
        )))
    }
}

/// Energy window `[E/4, 4E]` around the seed energy.
pub fn default_window(sys: &HamiltonianSystem, seed: &PhaseState) -> (f64, f64) {
    let e = sys.energy(seed);
    (0.25 * e, 4.0 * e)
}

pub fn chart_for(sys: &HamiltonianSystem, window: (f64, f64), analytic: bool) -> CliResult<SharedChart> {
    if analytic {
        require_oscillator("analytic chart", sys)?;
        return Ok(Arc::new(HoChart::new()));
    }
    Ok(Arc::new(NumericChart1d::new(sys.clone(), window.0, window.1)?))
}

/// Route used to build error fields of `scheme`: exact Taylor coefficients
/// when the scheme expands in `Δ`, otherwise differences against the exact flow.
pub fn preferred_method(scheme: &SharedScheme, sys: &HamiltonianSystem, at: &PhaseState) -> CliResult<ErrorMethod> {
    match taylor_errors(scheme.as_ref(), sys, at, 2) {
        Ok(_) => Ok(ErrorMethod::TaylorCoefficients),
        Err(Error::Capability(_)) if sys.has_exact_flow() => Ok(ErrorMethod::FlowDifference),
        Err(Error::Capability(msg)) => Err(Error::Capability(format!(
            "no route to the error fields of '{}': {msg}",
            scheme.name()
        ))
        .into()),
        Err(e) => Err(e.into()),
    }
}

fn base_scheme(id: &str, sys: &HamiltonianSystem, seed: &PhaseState) -> CliResult<SharedScheme> {
    let scheme: SharedScheme = match id {
        "exact" => {
            if sys.label() != OSCILLATOR_LABEL {
                return Err(Error::Capability(format!(
                    "'{}' has no closed-form exact scheme; try 'chart-exact'",
                    sys.label()
                ))
                .into());
            }
            Arc::new(exact_ho_scheme())
        }
        "euler" => Arc::new(euler_scheme(sys)),
        "rk4" => Arc::new(generic_rk4_scheme(sys)),
        "rk4-ho" => {
            require_oscillator(id, sys)?;
            Arc::new(rk4_ho_scheme())
        }
        "dg" | "discrete-gradient" => {
            require_oscillator(id, sys)?;
            Arc::new(discrete_gradient_ho_scheme())
        }
        "dg-reparam" => {
            require_oscillator(id, sys)?;
            let probes = square_grid(-1.0, 1.0, 2);
            Arc::new(reparametrize_time(Arc::new(discrete_gradient_ho_scheme()), sys, &probes)?.scheme())
        }
        "chart-exact" => {
            let analytic = sys.label() == OSCILLATOR_LABEL;
            let chart = chart_for(sys, default_window(sys, seed), analytic)?;
            Arc::new(exact_scheme_from_chart(chart, seed)?)
        }
        other => {
            if let Some(k) = other.strip_prefix("lie") {
                let order: usize = k
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad Lie-series order in '{other}'")))?;
                Arc::new(lie_series_scheme(sys, order)?)
            } else {
                return Err(CliError::Config(format!("unknown scheme id '{other}'")));
            }
        }
    };
    Ok(scheme)
}

/// Parses `base+v<k>+...` into the base id and the orders to subtract.
pub fn split_corrections(id: &str) -> CliResult<(&str, Vec<usize>)> {
    let mut parts = id.split('+');
    let base = parts.next().unwrap_or_default();
    let mut orders = Vec::new();
    for p in parts {
        let k = p
            .strip_prefix('v')
            .and_then(|k| k.parse::<usize>().ok())
            .ok_or_else(|| CliError::Config(format!("bad correction term '{p}' in '{id}'")))?;
        orders.push(k);
    }
    Ok((base, orders))
}

/// `base` with `v_k` subtracted for each `k` in `orders`.
pub fn corrected(
    base: SharedScheme,
    sys: &HamiltonianSystem,
    seed: &PhaseState,
    orders: &[usize],
) -> CliResult<SharedScheme> {
    if orders.is_empty() {
        return Ok(base);
    }
    let method = preferred_method(&base, sys, seed)?;
    let terms = orders
        .iter()
        .map(|&k| Ok((k, error_field(base.clone(), sys, k, method)?)))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Arc::new(corrected_scheme(base, terms)))
}

pub fn build_scheme(id: &str, sys: &HamiltonianSystem, seed: &PhaseState) -> CliResult<SharedScheme> {
    let (base_id, orders) = split_corrections(id)?;
    let base = base_scheme(base_id, sys, seed)?;
    corrected(base, sys, seed, &orders)
}
