//! `thiele`: build, evaluate and verify Thiele-type interpolating continued fractions.

mod commands;
mod demo;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiele_core::Backend;

use report::ReportFormat;

/// Exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const VALIDATION: u8 = 2;
    pub const BREAKDOWN: u8 = 3;
    pub const IO: u8 = 4;
    pub const CHECK_FAILED: u8 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "thiele", version, about = "Thiele-type interpolating continued fractions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a fraction from a node file.
    Build(BuildArgs),
    /// Evaluate a fraction file at points.
    Eval(EvalArgs),
    /// Check a fraction against the node data it interpolates.
    Verify(VerifyArgs),
    /// Run a bundled example end to end.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BackendArg {
    Float,
    Exact,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Float => Backend::Float,
            BackendArg::Exact => Backend::Exact,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct NumericArgs {
    /// Scalar backend; exact is available for scalar arguments only.
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Gauss-Legendre order for vector arguments.
    #[arg(long, default_value_t = 32)]
    pub quad_order: usize,
    /// Base finite-difference step.
    #[arg(long, default_value_t = 1e-6)]
    pub fd_step: f64,
    /// Cell count for grid arguments given as expressions.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Fraction file to write; stdout when omitted (the report then goes to stderr).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Fraction file.
    #[arg(long)]
    pub input: PathBuf,
    /// A point, as JSON or comma-separated constant expressions. Repeatable.
    #[arg(long)]
    pub at: Vec<String>,
    /// JSON file holding an array of points.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Fraction file.
    #[arg(long)]
    pub input: PathBuf,
    /// Node file the fraction was built from.
    #[arg(long)]
    pub data: PathBuf,
    /// Fail with exit code 5 when a residual exceeds this bound.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DemoName {
    Example1,
    Example2,
    Continual,
    ScalarReduction,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(value_enum)]
    pub name: DemoName,
    #[command(flatten)]
    pub numeric: NumericArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Build(a) => commands::build(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Demo(a) => demo::run(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
