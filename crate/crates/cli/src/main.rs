//! `potint` — command-line front end for the product-integral library.
//!
//! Usage: `potint <command> --spec FILE --out DIR [--tol X] [--seed N]
//! [--verbose]`. Job specs are JSON documents with `"schema": 1`; artifacts
//! are JSON reports and CSV tables (17 significant digits, comma separator,
//! LF line endings, deterministic given the seed).
//!
//! Exit codes: 0 success, 1 malformed spec, 2 numerical failure, 3 I/O.

mod commands;
mod emit;
mod job;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use potint::Error;

#[derive(Debug)]
pub enum CliError {
    /// Exit 1: the job document or its inputs are invalid.
    Spec(String),
    /// Exit 2: a certificate or check was not met.
    Numerical(String),
    /// Exit 3: filesystem trouble.
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Spec(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Spec(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::MalformedSpec(_)
            | Error::InvalidIntegrator(_)
            | Error::InvalidKernel(_)
            | Error::InvalidPartition(_)
            | Error::DimensionMismatch(_)
            | Error::Serde(_)
            | Error::OutOfDomain(..)
            | Error::NotStrictlyIncreasing(_)
            | Error::UnsortedAngles
            | Error::ZeroAtOrigin => CliError::Spec(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Multiplicative integral of a kernel against an integrator.
    Prodint,
    /// Runge-Kutta solution of F' = F·f(t)M(t) for a polynomial density.
    Ode,
    /// Assemble a finite product from factor data and tabulate it.
    BpFactor,
    /// Detach the maximal elementary factor at a point.
    BpDetach,
    /// Convert a finite product into multiplicative step data.
    PotapovRepr,
    /// Rational boundary-unitary approximants with an error-vs-k table.
    CayleyApprox,
    /// Evaluate a forward construction (pp, sc or outer) on a grid.
    Construct,
    /// Label a function inner/outer/mixed from boundary determinant data.
    Classify,
    /// Two distinct integrators generating the same inner function.
    DemoNonuniqueness,
    /// Run a randomized invariant suite and report per-check residuals.
    Verify,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Prodint => "prodint",
            Command::Ode => "ode",
            Command::BpFactor => "bp-factor",
            Command::BpDetach => "bp-detach",
            Command::PotapovRepr => "potapov-repr",
            Command::CayleyApprox => "cayley-approx",
            Command::Construct => "construct",
            Command::Classify => "classify",
            Command::DemoNonuniqueness => "demo-nonuniqueness",
            Command::Verify => "verify",
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "potint",
    about = "Multiplicative integrals and inner/outer factorization on the unit disk"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON job spec ("schema": 1). `demo-nonuniqueness` runs without one.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory for JSON/CSV artifacts (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Tolerance override; defaults to the spec's `tol`, then 1e-8.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed override for randomized suites; defaults to the spec's `seed`,
    /// then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    verbose: bool,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let job = match &cli.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            job::JobFile::parse(&text, cli.command.name())?
        }
        None => {
            if cli.command != Command::DemoNonuniqueness {
                return Err(CliError::Spec(format!(
                    "command `{}` requires --spec FILE",
                    cli.command.name()
                )));
            }
            job::JobFile::parse(r#"{"schema":1}"#, cli.command.name())?
        }
    };

    let tol = cli.tol.or(job.tol).unwrap_or(1e-8);
    if !(tol > 0.0) {
        return Err(CliError::Spec(format!("tol must be positive, got {tol}")));
    }
    let seed = cli.seed.or(job.seed).unwrap_or(0);

    std::fs::create_dir_all(&cli.out)?;
    if cli.verbose {
        eprintln!(
            "potint {}: tol {tol:.3e}, seed {seed}, out {}",
            cli.command.name(),
            cli.out.display()
        );
    }

    match cli.command {
        Command::Prodint => commands::cmd_prodint(&job, &cli.out, tol),
        Command::Ode => commands::cmd_ode(&job, &cli.out),
        Command::BpFactor => commands::cmd_bp_factor(&job, &cli.out),
        Command::BpDetach => commands::cmd_bp_detach(&job, &cli.out, tol),
        Command::PotapovRepr => commands::cmd_potapov_repr(&job, &cli.out),
        Command::CayleyApprox => commands::cmd_cayley_approx(&job, &cli.out, tol),
        Command::Construct => commands::cmd_construct(&job, &cli.out, tol),
        Command::Classify => commands::cmd_classify(&job, &cli.out, tol),
        Command::DemoNonuniqueness => commands::cmd_demo_nonuniqueness(&cli.out, tol),
        Command::Verify => verify::cmd_verify(&job, &cli.out, tol, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("potint: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
