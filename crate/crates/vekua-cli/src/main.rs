//! Batch front door for the vekua solver.
//!
//! Every subcommand reads one JSON run configuration, applies any scalar
//! overrides from the command line, runs its task, and prints a
//! deterministic JSON report to stdout. Failures map to documented exit
//! codes so batch drivers can triage without parsing messages.

mod config;
mod report;
mod selftest;
mod tasks;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Overrides;
use vekua::Error;

const EXIT_HELP: &str = "Exit codes:
  0  success
  2  configuration, schema, or I/O error
  3  operator hypothesis violated (alpha = 0 coupling, |alpha| = |delta|
     degeneracy, rho = 0, or a drift term where the task requires none)
  4  resonance: a boundary denominator vanished or the monodromy is singular
  5  numerical failure, or a selftest check did not pass";

#[derive(Parser)]
#[command(
    name = "vekua",
    version,
    about = "Spectral solver and solvability checker for Vekua-type \
             evolution equations on product groups",
    after_help = EXIT_HELP
)]
struct Cli {
    #[command(subcommand)]
    task: Task,
}

#[derive(Subcommand)]
enum Task {
    /// Solve the equation on the truncated spectrum and report residuals
    Solve(CommonArgs),
    /// Decide solvability of a drift-free operator by the four-case split
    Classify(CommonArgs),
    /// Enumerate resonance-system roots over the truncated spectrum
    Resonances(CommonArgs),
    /// Measure small-denominator lower bounds in every applicable variant
    Diophantine(CommonArgs),
    /// Compare the closed-form mode solver against Runge-Kutta shooting
    Oracle(CommonArgs),
    /// Run the built-in reduced-scale checks
    Selftest(CommonArgs),
}

impl Task {
    fn name(&self) -> &'static str {
        match self {
            Task::Solve(_) => "solve",
            Task::Classify(_) => "classify",
            Task::Resonances(_) => "resonances",
            Task::Diophantine(_) => "diophantine",
            Task::Oracle(_) => "oracle",
            Task::Selftest(_) => "selftest",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Task::Solve(a)
            | Task::Classify(a)
            | Task::Resonances(a)
            | Task::Diophantine(a)
            | Task::Oracle(a)
            | Task::Selftest(a) => a,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration file (JSON)
    #[arg(short, long)]
    config: PathBuf,

    /// Override operator.delta
    #[arg(long)]
    delta: Option<f64>,

    /// Override the real part of operator.alpha
    #[arg(long)]
    alpha_re: Option<f64>,

    /// Override the imaginary part of operator.alpha
    #[arg(long)]
    alpha_im: Option<f64>,

    /// Override every truncation bound with one value
    #[arg(long, value_name = "L")]
    trunc_l: Option<u32>,

    /// Override truncation.n_t
    #[arg(long, value_name = "N")]
    nt: Option<usize>,

    /// Override the output path prefix for artifacts
    #[arg(long)]
    output: Option<String>,
}

/// CLI-level error: what went wrong plus the exit code it maps to.
pub enum CliError {
    /// Configuration, schema, or I/O problem.
    Config(String),
    /// A configured operator sits outside the standing hypotheses.
    Hypothesis(String),
    /// An error surfaced by the library.
    Lib(Error),
    /// One or more selftest checks did not pass.
    SelftestFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::SelftestFailed => 5,
            CliError::Lib(e) => match e {
                Error::ZeroAlpha
                | Error::HypothesisViolation { .. }
                | Error::LambdaNotZero
                | Error::DegenerateRho { .. } => 3,
                Error::ResonantMode { .. } | Error::SingularMonodromy { .. } => 4,
                Error::QuadratureFailure(_) => 5,
                _ => 2,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Hypothesis(msg) => write!(f, "{msg}"),
            CliError::SelftestFailed => write!(f, "selftest: one or more checks failed"),
            CliError::Lib(Error::ResonantMode { modes, d1_abs, d2_abs }) => {
                write!(
                    f,
                    "resonant mode(s): |D1| = {d1_abs:.3e}, |D2| = {d2_abs:.3e}"
                )?;
                for mode in modes.iter().take(8) {
                    write!(f, "\n  resonant at mode {mode}")?;
                }
                if modes.len() > 8 {
                    write!(f, "\n  and {} more", modes.len() - 8)?;
                }
                Ok(())
            }
            CliError::Lib(e) => write!(f, "{e} [{}]", e.kind()),
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let args = cli.task.args();
    let overrides = Overrides {
        delta: args.delta,
        alpha_re: args.alpha_re,
        alpha_im: args.alpha_im,
        trunc_l: args.trunc_l,
        nt: args.nt,
    };
    let mut eff = config::load_config(&args.config, overrides)?;
    if args.output.is_some() {
        eff.config.output = args.output.clone();
    }
    let name = cli.task.name();
    if let Some(declared) = &eff.config.task {
        if declared != name {
            return Err(CliError::Config(format!(
                "config declares task \"{declared}\" but the {name} subcommand was invoked"
            )));
        }
    }
    let path = args.config.display().to_string();
    match cli.task {
        Task::Solve(_) => tasks::run_solve(&path, &eff),
        Task::Classify(_) => tasks::run_classify(&path, &eff),
        Task::Resonances(_) => tasks::run_resonances(&path, &eff),
        Task::Diophantine(_) => tasks::run_diophantine(&path, &eff),
        Task::Oracle(_) => tasks::run_oracle(&path, &eff),
        Task::Selftest(_) => selftest::run_selftest(&path, &eff),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
