use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hamflow_cli::commands::{self, DEFAULT_AUDIT_STEPS};
use hamflow_cli::{CliError, CliResult, Overrides, RunManifest};

#[derive(Parser)]
#[command(name = "hamflow", version, about = "Exact and approximate one-step schemes for Hamiltonian systems")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Manifest file; flags given alongside override its entries.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    /// Output directory (HAMFLOW_OUT takes precedence).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// System id: ho, pendulum, quartic.
    #[arg(long, global = true)]
    system: Option<String>,

    /// Scheme id, e.g. exact, euler, dg, rk4, lie6, chart-exact, euler+v2+v3.
    #[arg(long, global = true)]
    scheme: Option<String>,

    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    seed_q: Option<Vec<f64>>,

    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    seed_p: Option<Vec<f64>>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    delta: Option<f64>,

    #[arg(long, global = true)]
    steps: Option<usize>,

    /// Functionals to track, comma separated (x/p, 2H, H, p/x, q1/p1, ...).
    #[arg(long, global = true, value_delimiter = ',')]
    functionals: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a trajectory and write trajectory.csv with plots.
    Simulate,
    /// Compute error fields, classify the leading one and check invariants.
    AnalyzeError {
        #[arg(long, default_value_t = 5)]
        order: usize,
    },
    /// Subtract error fields from the scheme and measure convergence.
    Correct {
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
    },
    /// Build an action-angle chart and the exact scheme it induces.
    ActionAngle {
        /// Energy window as LO,HI.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        window: Option<Vec<f64>>,
        /// Use the closed-form oscillator chart instead of the numerical one.
        #[arg(long)]
        analytic: bool,
    },
    /// Check identity, inverse, group law, symplecticity, energy and consistency.
    Audit {
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
    },
}

fn manifest(args: &RunArgs) -> CliResult<RunManifest> {
    let mut m = match &args.manifest {
        Some(path) => RunManifest::load(path)?,
        None => RunManifest::default(),
    };
    m.apply(&Overrides {
        system: args.system.clone(),
        scheme: args.scheme.clone(),
        seed_q: args.seed_q.clone(),
        seed_p: args.seed_p.clone(),
        delta: args.delta,
        steps: args.steps,
        functionals: args.functionals.clone(),
    });
    Ok(m)
}

fn run(cli: Cli) -> CliResult<()> {
    let m = manifest(&cli.run)?;
    let out = commands::resolve_out_dir(cli.run.out.as_deref());
    match cli.command {
        Command::Simulate => {
            let r = commands::simulate(&m, &out)?;
            println!(
                "{} steps of '{}' to t = {}; max sigma(q,p) = {:e}",
                r.rows - 1,
                m.scheme,
                r.final_t,
                r.max_sigma_phase
            );
        }
        Command::AnalyzeError { order } => {
            let a = commands::analyze_error(&m, order, &out)?;
            println!("leading error of '{}': {}", a.scheme, a.label);
            for inv in &a.invariants {
                println!(
                    "  invariant {}: {} (residual {:e})",
                    inv.functional,
                    if inv.pass { "PASS" } else { "FAIL" },
                    inv.max_residual
                );
            }
            if a.reparametrization.applicable {
                println!("  time reparametrization available; W table in errors.json");
            }
        }
        Command::Correct { orders } => {
            let c = commands::correct(&m, &orders, &out)?;
            println!(
                "'{}': slope {:.3} -> '{}': slope {:.3}",
                c.base, c.base_slope, c.id, c.corrected_slope
            );
            println!("use --scheme {} to simulate the corrected scheme", c.id);
        }
        Command::ActionAngle { window, analytic } => {
            let window = match window.as_deref() {
                None => None,
                Some(&[lo, hi]) => Some((lo, hi)),
                Some(_) => return Err(CliError::Config("--window takes LO,HI".into())),
            };
            let s = commands::action_angle(&m, window, analytic, &out)?;
            println!(
                "{}: gamma = {:?}, nu = {:?}, period = {:?}, reference action drift {:e}",
                s.chart, s.gamma, s.nu, s.period, s.max_action_drift
            );
        }
        Command::Audit { deltas } => {
            let deltas = deltas.unwrap_or_else(|| DEFAULT_AUDIT_STEPS.to_vec());
            let r = commands::audit(&m, &deltas, &out)?;
            for c in &r.checks {
                let at = c.delta.map(|d| format!(" at {d}")).unwrap_or_default();
                println!(
                    "{:<13}{at}: {} ({:e})",
                    c.name,
                    if c.pass { "PASS" } else { "FAIL" },
                    c.measured
                );
            }
            for c in &r.composite_steps {
                println!(
                    "two steps of {} = one step of {} (residual {:e})",
                    c.delta, c.step, c.residual
                );
            }
        }
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hamflow: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &CliError) -> ExitCode {
    ExitCode::from(e.exit_code() as u8)
}
