//! Labels the leading error field by fitting it onto the time-translation
//! and scaling directions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::error_lab::series::ErrorSeries;
use crate::lie::evolution_generator;
use crate::system::HamiltonianSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorClass {
    Exact,
    TimeTranslation,
    Scaling,
    Mixed,
    Unclassified,
}

impl ErrorClass {
    pub fn label(self) -> &'static str {
        match self {
            ErrorClass::Exact => "exact",
            ErrorClass::TimeTranslation => "time-translation",
            ErrorClass::Scaling => "scaling",
            ErrorClass::Mixed => "mixed",
            ErrorClass::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class: ErrorClass,
    /// Order `k` of the leading nonzero field, if any.
    pub order: Option<usize>,
    /// Coefficient of `𝔤` in the fit.
    pub time_coefficient: f64,
    /// Coefficient of `q∂q + p∂p` in the fit.
    pub scaling_coefficient: f64,
    /// Fit residual relative to the field norm.
    pub residual: f64,
}

/// Fields smaller than this (max norm over the grid) count as zero.
pub const ZERO_FIELD_TOL: f64 = 1e-8;
/// Relative residual below which a fit is accepted.
pub const FIT_TOL: f64 = 1e-6;

/// Fits the leading `v_k` over all series (one per grid state) as
/// `a·𝔤 + b·(q∂q + p∂p)` with constant `a`, `b`.
pub fn classify_leading_error(sys: &HamiltonianSystem, grid: &[ErrorSeries]) -> Result<Classification> {
    if grid.is_empty() {
        return Err(Error::Parameter("classification needs at least one series".into()));
    }
    let max_order = grid.iter().map(|s| s.order).min().unwrap_or(0);
    let leading = (2..=max_order).find(|k| {
        grid.iter()
            .any(|s| s.get(*k).is_some_and(|v| v.norm_inf() > ZERO_FIELD_TOL))
    });
    let Some(k) = leading else {
        return Ok(Classification {
            class: ErrorClass::Exact,
            order: None,
            time_coefficient: 0.0,
            scaling_coefficient: 0.0,
            residual: 0.0,
        });
    };
    // Normal equations for the two-parameter least-squares fit.
    let (mut gg, mut gs, mut ss, mut gv, mut sv, mut vv) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let mut rows = Vec::with_capacity(grid.len());
    for series in grid {
        let v = series.get(k).ok_or_else(|| Error::Parameter(format!("series lacks v{k}")))?;
        let g = evolution_generator(sys, &series.base)?.stacked();
        let sc = series.base.coords();
        let vs = v.stacked();
        for i in 0..vs.len() {
            gg += g[i] * g[i];
            gs += g[i] * sc[i];
            ss += sc[i] * sc[i];
            gv += g[i] * vs[i];
            sv += sc[i] * vs[i];
            vv += vs[i] * vs[i];
        }
        rows.push((g, sc, vs));
    }
    let det = gg * ss - gs * gs;
    let (a, b) = if det.abs() > 1e-14 * (gg * ss).max(1e-300) {
        ((gv * ss - sv * gs) / det, (sv * gg - gv * gs) / det)
    } else if gg > 0.0 {
        (gv / gg, 0.0)
    } else {
        (0.0, if ss > 0.0 { sv / ss } else { 0.0 })
    };
    let mut rr = 0.0;
    for (g, sc, vs) in &rows {
        for i in 0..vs.len() {
            let r = vs[i] - a * g[i] - b * sc[i];
            rr += r * r;
        }
    }
    let residual = (rr / vv).sqrt();
    let big = a.abs().max(b.abs());
    let class = if residual > FIT_TOL {
        ErrorClass::Unclassified
    } else if b.abs() <= FIT_TOL * big {
        ErrorClass::TimeTranslation
    } else if a.abs() <= FIT_TOL * big {
        ErrorClass::Scaling
    } else {
        ErrorClass::Mixed
    };
    Ok(Classification {
        class,
        order: Some(k),
        time_coefficient: a,
        scaling_coefficient: b,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_lab::invariant::square_grid;
    use crate::error_lab::series::taylor_errors;
    use crate::scheme::{discrete_gradient_ho_scheme, euler_scheme, exact_ho_scheme, Scheme};
    use crate::system::{make_harmonic_oscillator, make_pendulum};

    fn series_on_grid(scheme: &dyn Scheme, sys: &HamiltonianSystem) -> Vec<ErrorSeries> {
        square_grid(-2.0, 2.0, 5)
            .iter()
            .map(|s| taylor_errors(scheme, sys, s, 5).unwrap())
            .collect()
    }

    #[test]
    fn catalogue_schemes() {
        let ho = make_harmonic_oscillator();
        let c = classify_leading_error(&ho, &series_on_grid(&euler_scheme(&ho), &ho)).unwrap();
        assert_eq!(c.class, ErrorClass::Scaling);
        assert_eq!(c.order, Some(2));
        assert!((c.scaling_coefficient - 1.0).abs() < 1e-12);

        let c = classify_leading_error(&ho, &series_on_grid(&discrete_gradient_ho_scheme(), &ho)).unwrap();
        assert_eq!(c.class, ErrorClass::TimeTranslation);
        assert_eq!(c.order, Some(3));
        assert!((c.time_coefficient + 0.5).abs() < 1e-12);

        let c = classify_leading_error(&ho, &series_on_grid(&exact_ho_scheme(), &ho)).unwrap();
        assert_eq!(c.class, ErrorClass::Exact);
    }

    #[test]
    fn nonlinear_leading_error_is_unclassified() {
        let pend = make_pendulum();
        let c = classify_leading_error(&pend, &series_on_grid(&euler_scheme(&pend), &pend)).unwrap();
        assert_eq!(c.class, ErrorClass::Unclassified);
    }
}
