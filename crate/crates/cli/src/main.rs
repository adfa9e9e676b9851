#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use solispec::certificate::{control_operator, negative_control, scan_embedded};
use solispec::ground_state::{solve_ground_state, GroundState};
use solispec::inversion::fixed_point_residual;
use solispec::jost::{decaying_solution, default_window, expand_in_modes, End};
use solispec::operator::{EigenOptions, LinearizedOperator};

use config::RunConfig;
use report::{Envelope, GroundReport, JostReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Hypothesis(_) | CliError::Numerical(_) => 1,
        }
    }
}

impl From<solispec::Error> for CliError {
    fn from(e: solispec::Error) -> Self {
        use solispec::Error as E;
        let msg = e.to_string();
        match e {
            E::Config(m) => CliError::Config(m),
            E::HypothesisViolation(m) => CliError::Hypothesis(m),
            E::InvalidParameters(_) | E::Domain(_) | E::GridMismatch { .. } => {
                CliError::Config(msg)
            }
            E::BracketNotFound(_) => CliError::Hypothesis(msg),
            _ => CliError::Numerical(msg),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "solispec",
    version,
    about = "Spectral analysis of linearized NLS ground states"
)]
struct Cli {
    /// Print the default configuration as JSON and exit.
    #[arg(long)]
    print_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path, overriding the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the ground state and write x, Q, Q' plus a JSON sidecar.
    Ground(Common),
    /// Discrete eigenvalues of the linearized operator in the gap.
    Spectrum(Common),
    /// Solution decaying at +inf for one energy: x, f, g, f', g' plus sidecar.
    Jost {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
    },
    /// Residuals of the half-line fixed-point identities at one energy.
    InvertCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
    },
    /// Embedded-eigenvalue certificates on an energy grid.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lmin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lmax: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Certificates on a decoupled sech² well that does carry embedded levels.
    Control {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        depth: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    RunConfig::load(common.config.as_deref())
}

fn prepare(cfg: &RunConfig) -> Result<(), CliError> {
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    if cfg.threads > 0 {
        // the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    Ok(())
}

fn output_path(common: &Common, configured: &str) -> Result<PathBuf, CliError> {
    let p = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(configured));
    let parent = p
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(CliError::Io(format!(
            "output directory {} does not exist",
            parent.display()
        )));
    }
    Ok(p)
}

fn ground(cfg: &RunConfig) -> Result<(GroundState, LinearizedOperator), CliError> {
    let nl = cfg.nonlinearity()?;
    let gs = solve_ground_state(&nl, &cfg.ground_params())?;
    gs.check_hypotheses()?;
    let op = LinearizedOperator::from_ground_state(&gs, &nl)?;
    Ok((gs, op))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.print_defaults {
        report::print(&report::to_json(&RunConfig::default()));
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(CliError::Config(
            "missing subcommand (ground, spectrum, jost, invert-check, scan, control)".into(),
        ));
    };
    match command {
        Command::Ground(common) => {
            let cfg = load(&common)?;
            prepare(&cfg)?;
            let out = output_path(&common, &cfg.output.ground)?;
            let nl = cfg.nonlinearity()?;
            let (gs, _) = ground(&cfg)?;
            let rep = GroundReport::new(&gs, &nl)?;
            let rows = (0..gs.grid.len()).map(|i| [gs.grid.x(i), gs.q[i], gs.qp[i]]);
            let side = out.with_extension("json");
            report::write_csv(&out, &["x", "Q", "Qp"], rows)?;
            report::write_json(&side, &Envelope::new("ground", &cfg, &rep))?;
            println!(
                "Q(0) = {:.12}, rate = {:.8}, c0 = {:.8}; wrote {} and {}",
                rep.summary.shoot_value,
                rep.far_field.rate,
                rep.far_field.amplitude,
                out.display(),
                side.display()
            );
        }
        Command::Spectrum(common) => {
            let cfg = load(&common)?;
            prepare(&cfg)?;
            let out = output_path(&common, &cfg.output.spectrum)?;
            let (_, op) = ground(&cfg)?;
            let spec = op.discrete_eigenvalues(&EigenOptions::default())?;
            report::write_json(&out, &Envelope::new("spectrum", &cfg, &spec))?;
            for p in &spec.eigenpairs {
                println!(
                    "lambda = {:+.6e} {:+.6e}i  residual {:.1e}  {:?}",
                    p.re, p.im, p.residual, p.parity
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Jost { common, lambda } => {
            let cfg = load(&common)?;
            prepare(&cfg)?;
            if !(lambda.abs() >= cfg.mu) {
                return Err(CliError::Config(format!(
                    "lambda = {lambda} lies in the gap (-{mu}, {mu})",
                    mu = cfg.mu
                )));
            }
            let out = output_path(&common, &cfg.output.jost)?;
            let (_, op) = ground(&cfg)?;
            let jo = cfg.jost_options();
            let sol = decaying_solution(&op, lambda, &jo)?;
            let x_plus = sol.x_asym;
            let plus = expand_in_modes(
                &sol,
                &op,
                End::PlusInfinity,
                default_window(&op, lambda, End::PlusInfinity, x_plus, jo.negligible)?,
            )?;
            let rho = 5.0 / cfg.mu.sqrt();
            let minus = expand_in_modes(
                &sol,
                &op,
                End::MinusInfinity,
                default_window(&op, lambda, End::MinusInfinity, -rho, jo.negligible)?,
            )?;
            let rep = JostReport {
                lambda,
                x_asym: sol.x_asym,
                ode_residual: sol.ode_residual(&op),
                plus_infinity: plus,
                minus_infinity: minus,
            };
            let rows = (0..sol.grid.len())
                .map(|i| [sol.grid.x(i), sol.f[i], sol.g[i], sol.fp[i], sol.gp[i]]);
            let side = out.with_extension("json");
            report::write_csv(&out, &["x", "f", "g", "fp", "gp"], rows)?;
            report::write_json(&side, &Envelope::new("jost", &cfg, &rep))?;
            println!(
                "ode residual {:.2e}; -inf coefficients (dec, grow, osc1, osc2) = {:?}; wrote {} and {}",
                rep.ode_residual,
                rep.minus_infinity.coefficients,
                out.display(),
                side.display()
            );
        }
        Command::InvertCheck { common, lambda } => {
            let cfg = load(&common)?;
            prepare(&cfg)?;
            if !(lambda.abs() >= cfg.mu) {
                return Err(CliError::Config(format!(
                    "lambda = {lambda} lies in the gap (-{mu}, {mu})",
                    mu = cfg.mu
                )));
            }
            let (gs, op) = ground(&cfg)?;
            let sol = decaying_solution(&op, lambda, &cfg.jost_options())?;
            let u: Vec<f64> = sol.f.iter().zip(&sol.g).map(|(f, g)| f + g).collect();
            let v: Vec<f64> = sol.f.iter().zip(&sol.g).map(|(f, g)| f - g).collect();
            let (x0, x1) = (cfg.tolerances.invert_x0, cfg.tolerances.invert_x1);
            let (r_u, r_v) = fixed_point_residual(&gs, &u, &v, lambda, x0, x1)?;
            let rep = report::InvertReport {
                lambda,
                x0,
                x1,
                r_u,
                r_v,
            };
            let env = Envelope::new("invert-check", &cfg, &rep);
            if let Some(out) = &common.out {
                let out = output_path(&common, out.to_str().unwrap_or_default())?;
                report::write_json(&out, &env)?;
            }
            report::print(&report::to_json(&env));
        }
        Command::Scan {
            common,
            lmin,
            lmax,
            n,
        } => {
            let mut cfg = load(&common)?;
            if let Some(v) = lmin {
                cfg.scan.lmin = v;
            }
            if let Some(v) = lmax {
                cfg.scan.lmax = v;
            }
            if let Some(v) = n {
                cfg.scan.n = v;
            }
            prepare(&cfg)?;
            let grid = cfg.lambda_grid()?;
            let out = output_path(&common, &cfg.output.scan)?;
            let (gs, op) = ground(&cfg)?;
            let mut rep = scan_embedded(&op, &grid, &cfg.certify_options())?;
            rep.ground_state = Some(gs.summary());
            let csv_path = out.with_extension("csv");
            report::write_json(&out, &Envelope::new("scan", &cfg, &rep))?;
            report::write_scan_csv(&csv_path, &rep.records)?;
            let s = &rep.summary;
            println!(
                "{} energies: {} no embedded eigenvalue, {} inconclusive, {} candidates; \
                 min parity {:.3e}, min mismatch {:.3e}; wrote {} and {}",
                s.count,
                s.no_embedded,
                s.inconclusive,
                s.embedded_candidates,
                s.min_parity,
                s.min_mismatch,
                out.display(),
                csv_path.display()
            );
        }
        Command::Control { common, mu, depth } => {
            let mut cfg = load(&common)?;
            if let Some(v) = mu {
                cfg.mu = v;
            }
            if let Some(v) = depth {
                cfg.control.depth = v;
            }
            prepare(&cfg)?;
            if !(cfg.control.step > 0.0) {
                return Err(CliError::Config(format!(
                    "control.step must be positive, got {}",
                    cfg.control.step
                )));
            }
            let out = output_path(&common, &cfg.output.control)?;
            let op = control_operator(cfg.mu, cfg.control.depth, Some(cfg.r()), Some(cfg.h()))?;
            let rep = negative_control(
                cfg.mu,
                cfg.control.depth,
                cfg.control.step,
                &op,
                &cfg.certify_options(),
            )?;
            report::write_json(&out, &Envelope::new("control", &cfg, &rep))?;
            for r in &rep.records {
                println!(
                    "lambda = {:.8}: mismatch {:.2e}, verdict {:?}",
                    r.lambda, r.mismatch, r.verdict
                );
            }
            println!(
                "predicted {:?}, detected {:?}; wrote {}",
                rep.predicted,
                rep.detected,
                out.display()
            );
        }
    }
    Ok(())
}
