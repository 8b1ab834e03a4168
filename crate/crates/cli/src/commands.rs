//! The five subcommands. Each writes its files into `out` together with the
//! effective manifest and returns a short summary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use hamflow_core::action_angle::{exact_scheme_from_chart, frequencies};
use hamflow_core::diagnostics::{
    attach_reference, audit_scheme, run_trajectory, sigma_phase, AuditConfig, AuditReport, ErrorReport, ReferenceKind,
    TrajectoryRecord,
};
use hamflow_core::error_lab::{
    classify_leading_error, error_field, flow_difference_errors, reparametrize_time, square_grid, taylor_errors,
    verify_error_invariant, Classification, ErrorMethod, ErrorSeries, InvariantReport,
};
use hamflow_core::lie::evolution_generator;
use hamflow_core::{Error, HamiltonianSystem, PhaseState, ScalarField, Scheme, SharedScheme};

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::registry::{build_scheme, chart_for, corrected, default_window, preferred_method};
use crate::svg::{line_plot, Series};

/// Output directory: `HAMFLOW_OUT` when set, else the flag, else `hamflow-out`.
pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    match std::env::var_os("HAMFLOW_OUT") {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => flag.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("hamflow-out")),
    }
}

/// 17 significant digits, enough to recover every `f64` exactly.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn prepare(out: &Path, m: &RunManifest) -> CliResult<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write_text(&out.join("manifest.json"), &m.to_json())
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    write_text(path, &text)
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Config(format!("{other:?}")),
    })?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn functionals(m: &RunManifest, sys: &HamiltonianSystem) -> CliResult<Vec<ScalarField>> {
    m.functionals
        .iter()
        .map(|name| Ok(ScalarField::parse(name, sys, m.tolerances.singular_band)?))
        .collect()
}

fn check_seed(sys: &HamiltonianSystem, seed: &PhaseState) -> CliResult<()> {
    if seed.dim() != sys.dim() {
        return Err(CliError::Config(format!(
            "seed has dimension {} but '{}' has {}",
            seed.dim(),
            sys.label(),
            sys.dim()
        )));
    }
    Ok(())
}

/// Grid states at which the flow moves (fixed points dropped).
fn moving_grid(sys: &HamiltonianSystem, lo: f64, hi: f64, n: usize) -> CliResult<Vec<PhaseState>> {
    let mut out = Vec::new();
    for s in square_grid(lo, hi, n) {
        if evolution_generator(sys, &s)?.norm_inf() > 0.0 {
            out.push(s);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateOutcome {
    pub rows: usize,
    pub final_t: f64,
    pub max_sigma_phase: f64,
    pub reference: Option<ReferenceKind>,
}

pub fn trajectory_header(n: usize, functionals: &[ScalarField]) -> Vec<String> {
    let mut h = vec!["step".to_string(), "t".to_string()];
    h.extend((1..=n).map(|i| format!("q{i}")));
    h.extend((1..=n).map(|i| format!("p{i}")));
    h.push("H".into());
    h.extend((1..=n).map(|i| format!("ref_q{i}")));
    h.extend((1..=n).map(|i| format!("ref_p{i}")));
    h.push("sigma_phase".into());
    h.extend(functionals.iter().map(|f| format!("sigma_{}", f.name())));
    h
}

fn trajectory_rows(sys: &HamiltonianSystem, record: &TrajectoryRecord, report: &ErrorReport) -> Vec<Vec<String>> {
    let reference = record.reference.as_ref().expect("reference attached");
    record
        .states
        .iter()
        .zip(reference)
        .enumerate()
        .map(|(i, (s, r))| {
            let mut row = vec![i.to_string(), fmt_num(s.t())];
            row.extend(s.coords().into_iter().map(fmt_num));
            row.push(fmt_num(sys.energy(s)));
            row.extend(r.coords().into_iter().map(fmt_num));
            row.push(fmt_num(report.sigma_phase[i]));
            for f in &report.functionals {
                row.push(f.values[i].map(fmt_num).unwrap_or_default());
            }
            row
        })
        .collect()
}

fn trajectory_plots(out: &Path, record: &TrajectoryRecord, report: &ErrorReport) -> CliResult<()> {
    let reference = record.reference.as_ref().expect("reference attached");
    let pick = |states: &[PhaseState], f: &dyn Fn(&PhaseState) -> (f64, f64)| states.iter().map(f).collect::<Vec<_>>();
    let name = &record.scheme_name;
    let plots = [
        (
            "phase.svg",
            "Phase portrait",
            "q1",
            "p1",
            vec![
                Series::new(name.clone(), pick(&record.states, &|s| (s.q()[0], s.p()[0]))),
                Series::new("reference", pick(reference, &|s| (s.q()[0], s.p()[0]))),
            ],
        ),
        (
            "x_t.svg",
            "Position",
            "t",
            "q1",
            vec![
                Series::new(name.clone(), pick(&record.states, &|s| (s.t(), s.q()[0]))),
                Series::new("reference", pick(reference, &|s| (s.t(), s.q()[0]))),
            ],
        ),
        (
            "p_t.svg",
            "Momentum",
            "t",
            "p1",
            vec![
                Series::new(name.clone(), pick(&record.states, &|s| (s.t(), s.p()[0]))),
                Series::new("reference", pick(reference, &|s| (s.t(), s.p()[0]))),
            ],
        ),
    ];
    for (file, title, xl, yl, series) in plots {
        write_text(&out.join(file), &line_plot(title, xl, yl, &series))?;
    }
    let times = record.times();
    let mut sigma = vec![Series::new(
        "sigma(q,p)",
        times.iter().copied().zip(report.sigma_phase.iter().copied()).collect(),
    )];
    for f in &report.functionals {
        sigma.push(Series::new(
            format!("sigma({})", f.name),
            times
                .iter()
                .zip(&f.values)
                .map(|(t, v)| (*t, v.unwrap_or(f64::NAN)))
                .collect(),
        ));
    }
    write_text(&out.join("sigma_t.svg"), &line_plot("Squared errors", "t", "sigma", &sigma))
}

/// Runs the manifest's scheme and writes `trajectory.csv` and the plots.
/// A run cut short by a failing step still writes its files, then reports
/// the failure.
pub fn simulate(m: &RunManifest, out: &Path) -> CliResult<SimulateOutcome> {
    let sys = m.system()?;
    let seed = m.seed_state()?;
    check_seed(&sys, &seed)?;
    let steps = m.step_list()?;
    let fields = functionals(m, &sys)?;
    let scheme = build_scheme(&m.scheme, &sys, &seed)?;
    prepare(out, m)?;

    let mut record = run_trajectory(scheme.as_ref(), sys.label(), &seed, &steps);
    attach_reference(&mut record, &sys)?;
    let report = sigma_phase(&record, &fields)?;
    write_csv(
        &out.join("trajectory.csv"),
        &trajectory_header(sys.dim(), &fields),
        &trajectory_rows(&sys, &record, &report),
    )?;
    trajectory_plots(out, &record, &report)?;
    if let Some(f) = &record.failure {
        return Err(Error::Domain(format!("run stopped early: {f}")).into());
    }
    Ok(SimulateOutcome {
        rows: record.states.len(),
        final_t: record.states.last().map_or(0.0, |s| s.t()),
        max_sigma_phase: report.max_phase,
        reference: record.reference_kind,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldSample {
    pub state: Vec<f64>,
    /// `v_k` in stacked coordinates, keyed `v2`, `v3`, ...
    pub fields: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClockRow {
    pub delta: f64,
    pub lambda: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReparamSummary {
    pub applicable: bool,
    pub reason: Option<String>,
    pub table: Vec<ClockRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorAnalysis {
    pub scheme: String,
    pub system: String,
    pub order: usize,
    pub method: ErrorMethod,
    pub label: String,
    pub classification: Classification,
    pub samples: Vec<FieldSample>,
    pub invariants: Vec<InvariantReport>,
    pub reparametrization: ReparamSummary,
}

pub const CLOCK_TABLE_STEPS: [f64; 7] = [0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];

fn series_at(
    method: ErrorMethod,
    scheme: &dyn Scheme,
    sys: &HamiltonianSystem,
    s: &PhaseState,
    order: usize,
) -> hamflow_core::Result<ErrorSeries> {
    match method {
        ErrorMethod::FlowDifference => flow_difference_errors(scheme, sys, s, order),
        _ => taylor_errors(scheme, sys, s, order),
    }
}

/// Error fields `v_2..v_K` on a grid, their classification, invariant
/// checks for the manifest functionals, and the clock table when the
/// scheme is a time reparametrization.
pub fn analyze_error(m: &RunManifest, order: usize, out: &Path) -> CliResult<ErrorAnalysis> {
    let sys = m.system()?;
    let seed = m.seed_state()?;
    check_seed(&sys, &seed)?;
    let fields = functionals(m, &sys)?;
    let scheme: SharedScheme = build_scheme(&m.scheme, &sys, &seed)?;
    if !(2..=hamflow_core::error_lab::MAX_ERROR_ORDER).contains(&order) {
        return Err(CliError::Config(format!(
            "error order must lie in 2..={}, got {order}",
            hamflow_core::error_lab::MAX_ERROR_ORDER
        )));
    }
    prepare(out, m)?;
    let method = preferred_method(&scheme, &sys, &seed)?;
    let grid = square_grid(-1.5, 1.5, 5);
    let series = grid
        .iter()
        .map(|s| series_at(method, scheme.as_ref(), &sys, s, order))
        .collect::<hamflow_core::Result<Vec<_>>>()?;
    let classification = classify_leading_error(&sys, &series)?;
    let samples = if classification.order.is_none() {
        Vec::new()
    } else {
        series
            .iter()
            .map(|s| FieldSample {
                state: s.base.coords(),
                fields: s.v.iter().map(|(k, v)| (format!("v{k}"), v.stacked())).collect(),
            })
            .collect()
    };
    let invariants = match classification.order {
        Some(k) => {
            let field = error_field(scheme.clone(), &sys, k, method)?;
            fields
                .iter()
                .map(|phi| verify_error_invariant(&field, phi, &grid))
                .collect::<hamflow_core::Result<Vec<_>>>()?
        }
        None => Vec::new(),
    };
    let probes = moving_grid(&sys, -1.0, 1.0, 2)?;
    let reparametrization = match reparametrize_time(scheme.clone(), &sys, &probes) {
        Ok(r) => {
            let table = CLOCK_TABLE_STEPS
                .iter()
                .map(|&d| {
                    Ok(ClockRow {
                        delta: d,
                        lambda: r.lambda(d)?,
                        w: r.w(d)?,
                    })
                })
                .collect::<hamflow_core::Result<Vec<_>>>()?;
            ReparamSummary {
                applicable: true,
                reason: None,
                table,
            }
        }
        Err(e) => ReparamSummary {
            applicable: false,
            reason: Some(e.to_string()),
            table: Vec::new(),
        },
    };
    let analysis = ErrorAnalysis {
        scheme: scheme.name().to_string(),
        system: sys.label().to_string(),
        order,
        method,
        label: classification.class.label().to_string(),
        classification,
        samples,
        invariants,
        reparametrization,
    };
    write_json(&out.join("errors.json"), &analysis)?;
    Ok(analysis)
}

pub const CONVERGENCE_STEPS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
pub const CONVERGENCE_HORIZON: f64 = 2.0;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub delta: f64,
    pub base_error: f64,
    pub corrected_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Correction {
    /// Scheme id to pass to `simulate` for the corrected scheme.
    pub id: String,
    pub base: String,
    pub orders: Vec<usize>,
    pub base_slope: f64,
    pub corrected_slope: f64,
    pub table: Vec<ConvergenceRow>,
}

/// Global error at `CONVERGENCE_HORIZON` against the reference trajectory.
fn global_error(scheme: &dyn Scheme, sys: &HamiltonianSystem, seed: &PhaseState, delta: f64) -> CliResult<f64> {
    let n = (CONVERGENCE_HORIZON / delta).round() as usize;
    let mut record = run_trajectory(scheme, sys.label(), seed, &vec![delta; n]);
    if let Some(f) = record.failure {
        return Err(Error::Domain(f).into());
    }
    attach_reference(&mut record, sys)?;
    let reference = record.reference.as_ref().expect("attached");
    Ok(record.states.last().expect("seed").max_abs_diff(reference.last().expect("seed")))
}

/// Least-squares slope of `log e` against `log Δ`.
pub fn loglog_slope(deltas: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Subtracts `v_k` for each requested order from the manifest's scheme and
/// measures both convergence orders.
pub fn correct(m: &RunManifest, orders: &[usize], out: &Path) -> CliResult<Correction> {
    let sys = m.system()?;
    let seed = m.seed_state()?;
    check_seed(&sys, &seed)?;
    let base = build_scheme(&m.scheme, &sys, &seed)?;
    let fixed = corrected(base.clone(), &sys, &seed, orders)?;
    let mut id = m.scheme.clone();
    for k in orders {
        id.push_str(&format!("+v{k}"));
    }
    let mut effective = m.clone();
    effective.scheme = id.clone();
    prepare(out, &effective)?;

    let mut table = Vec::new();
    for &d in &CONVERGENCE_STEPS {
        table.push(ConvergenceRow {
            delta: d,
            base_error: global_error(base.as_ref(), &sys, &seed, d)?,
            corrected_error: global_error(fixed.as_ref(), &sys, &seed, d)?,
        });
    }
    let deltas: Vec<f64> = table.iter().map(|r| r.delta).collect();
    let base_errors: Vec<f64> = table.iter().map(|r| r.base_error).collect();
    let fixed_errors: Vec<f64> = table.iter().map(|r| r.corrected_error).collect();
    let result = Correction {
        id,
        base: m.scheme.clone(),
        orders: orders.to_vec(),
        base_slope: loglog_slope(&deltas, &base_errors),
        corrected_slope: loglog_slope(&deltas, &fixed_errors),
        table,
    };
    write_csv(
        &out.join("convergence.csv"),
        &["delta".into(), "base_error".into(), "corrected_error".into()],
        &result
            .table
            .iter()
            .map(|r| vec![fmt_num(r.delta), fmt_num(r.base_error), fmt_num(r.corrected_error)])
            .collect::<Vec<_>>(),
    )?;
    write_json(&out.join("correction.json"), &result)?;
    Ok(result)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartSummary {
    pub chart: String,
    pub window: (f64, f64),
    pub gamma: Vec<f64>,
    pub nu: Vec<f64>,
    pub period: Vec<f64>,
    pub grid_rows: usize,
    pub skipped: usize,
    pub reference: Option<ReferenceKind>,
    /// Largest `|I(reference) − γ|` along the reference trajectory.
    pub max_action_drift: f64,
}

/// Tabulates the chart on a grid, assembles the chart's exact scheme at
/// the seed and runs it next to the reference trajectory.
pub fn action_angle(m: &RunManifest, window: Option<(f64, f64)>, analytic: bool, out: &Path) -> CliResult<ChartSummary> {
    let sys = m.system()?;
    let seed = m.seed_state()?;
    check_seed(&sys, &seed)?;
    if sys.dim() != 1 {
        return Err(CliError::Config("action-angle charts are built for one degree of freedom".into()));
    }
    let steps = m.step_list()?;
    let window = window.unwrap_or_else(|| default_window(&sys, &seed));
    let chart = chart_for(&sys, window, analytic)?;
    prepare(out, m)?;

    let r = 1.5 * seed.norm_inf().max(1e-3);
    let n = 9;
    let mut rows = Vec::new();
    let mut skipped = 0;
    for i in 0..n {
        for j in 0..n {
            let q = -r + 2.0 * r * i as f64 / (n - 1) as f64;
            let p = -r + 2.0 * r * j as f64 / (n - 1) as f64;
            let s = PhaseState::one_d(q, p)?;
            match chart.to_action_angle(&s).and_then(|aa| Ok((aa, frequencies(chart.as_ref(), &s)?))) {
                Ok((aa, nu)) => rows.push(vec![
                    fmt_num(q),
                    fmt_num(p),
                    fmt_num(aa.angle[0]),
                    fmt_num(aa.action[0]),
                    fmt_num(nu[0]),
                ]),
                Err(_) => skipped += 1,
            }
        }
    }
    write_csv(
        &out.join("chart.csv"),
        &["q1", "p1", "theta1", "I1", "nu1"].map(String::from),
        &rows,
    )?;

    let scheme = exact_scheme_from_chart(chart.clone(), &seed)?;
    let gamma = scheme.gamma().to_vec();
    let period = chart.angle_periods(&gamma)?;
    let mut record = run_trajectory(&scheme, sys.label(), &seed, &steps);
    attach_reference(&mut record, &sys)?;
    let reference = record.reference.clone().expect("attached");
    let mut traj_rows = Vec::new();
    let mut drift = 0.0f64;
    let mut unwrapped: Option<(f64, f64)> = None;
    for (i, (s, rs)) in record.states.iter().zip(&reference).enumerate() {
        let aa = chart.to_action_angle(s)?;
        let theta = match unwrapped {
            None => aa.angle[0],
            Some((prev_raw, prev)) => {
                let mut d = aa.angle[0] - prev_raw;
                d -= period[0] * (d / period[0]).round();
                prev + d
            }
        };
        unwrapped = Some((aa.angle[0], theta));
        let ref_action = chart.to_action_angle(rs).map(|a| a.action[0]);
        if let Ok(a) = ref_action {
            drift = drift.max((a - gamma[0]).abs());
        }
        traj_rows.push(vec![
            i.to_string(),
            fmt_num(s.t()),
            fmt_num(s.q()[0]),
            fmt_num(s.p()[0]),
            fmt_num(theta),
            fmt_num(aa.action[0]),
            fmt_num(rs.q()[0]),
            fmt_num(rs.p()[0]),
            ref_action.map(fmt_num).unwrap_or_default(),
        ]);
    }
    write_csv(
        &out.join("chart_trajectory.csv"),
        &["step", "t", "q1", "p1", "theta1", "I1", "ref_q1", "ref_p1", "ref_I1"].map(String::from),
        &traj_rows,
    )?;
    let summary = ChartSummary {
        chart: chart.name().to_string(),
        window,
        gamma,
        nu: scheme.nu().to_vec(),
        period,
        grid_rows: rows.len(),
        skipped,
        reference: record.reference_kind,
        max_action_drift: drift,
    };
    write_json(&out.join("chart.json"), &summary)?;
    if let Some(f) = &record.failure {
        return Err(Error::Domain(format!("chart trajectory stopped early: {f}")).into());
    }
    Ok(summary)
}

pub const DEFAULT_AUDIT_STEPS: [f64; 2] = [0.1, 0.3];

/// Audits the manifest's scheme on a 4×4 grid of states; failed checks are
/// part of the report, not errors.
pub fn audit(m: &RunManifest, deltas: &[f64], out: &Path) -> CliResult<AuditReport> {
    let sys = m.system()?;
    let seed = m.seed_state()?;
    check_seed(&sys, &seed)?;
    let scheme = build_scheme(&m.scheme, &sys, &seed)?;
    prepare(out, m)?;
    let config = AuditConfig {
        tolerance: m.tolerances.audit,
        consistency_tolerance: m.tolerances.consistency,
        ..AuditConfig::default()
    };
    let states = moving_grid(&sys, -1.5, 1.5, 4)?;
    let report = audit_scheme(scheme.as_ref(), &sys, &states, deltas, &config);
    write_json(&out.join("audit.json"), &report)?;
    Ok(report)
}
