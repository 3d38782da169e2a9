//! `noma-maxmin` command-line driver.
//!
//! Exit codes: 0 success, 1 validation error, 2 solver did not converge,
//! 3 I/O error.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use noma_maxmin::harness::{self, ExperimentTable};
use noma_maxmin::{
    Error, Execution, Scenario, SolveMethod, SolveResult, SolverOptions, StoppingRule,
};
use serde_json::json;

const EXIT_VALIDATION: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "noma-maxmin",
    version,
    about = "Max-min fair NOMA power allocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one instance and print the allocation.
    Solve(SolveArgs),
    /// Per-iteration minimum rate of both methods (CSV).
    Trace(TraceArgs),
    /// Average iterations versus tolerance over random channels (CSV).
    SweepTolerance(SweepToleranceArgs),
    /// Average iterations versus total power over random channels (CSV).
    SweepPower(SweepPowerArgs),
    /// Minimum rate of max-min and equal-power schemes in NOMA and OMA (CSV).
    CompareSchemes(GainSweepArgs),
    /// Jain's index ratio between max-min and equal power (CSV).
    FairnessRatio(GainSweepArgs),
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// Scenario JSON document: {"gains": [...], "total_power": P, "label": "..."}.
    #[arg(long, conflicts_with_all = ["gains", "power"])]
    scenario: Option<PathBuf>,
    /// Channel power gains, comma separated, in any order.
    #[arg(long, value_delimiter = ',', requires = "power")]
    gains: Option<Vec<f64>>,
    /// Total transmit power (noise-normalized).
    #[arg(long, requires = "gains")]
    power: Option<f64>,
}

impl InstanceArgs {
    fn load(&self) -> Result<Scenario, Error> {
        match (&self.scenario, &self.gains, self.power) {
            (Some(path), _, _) => Scenario::load(path),
            (None, Some(gains), Some(power)) => Scenario::new(gains.clone(), power),
            _ => Err(Error::InvalidParameter(
                "give --scenario <file> or --gains with --power".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Power,
    Bisection,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Stopping {
    /// Minimum-rate change below tolerance and rate spread within tolerance.
    Certified,
    /// Minimum-rate change below tolerance only.
    MinRateChange,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 1e-5)]
    tolerance: f64,
    #[arg(long, value_enum, default_value_t = Method::Power)]
    method: Method,
    #[arg(long, value_enum, default_value_t = Stopping::Certified)]
    stopping: Stopping,
    #[arg(long, default_value_t = noma_maxmin::pf_solver::DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
    /// Print a JSON object instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct TraceArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 1e-5)]
    tolerance: f64,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExecArgs {
    /// Run Monte-Carlo trials on one thread.
    #[arg(long)]
    sequential: bool,
}

impl ExecArgs {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Debug, Args)]
struct SweepToleranceArgs {
    #[arg(long, default_value_t = harness::DEFAULT_USERS)]
    users: usize,
    #[arg(long, default_value_t = harness::DEFAULT_TOTAL_POWER)]
    power: f64,
    #[arg(long, default_value_t = harness::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_values_t = harness::DEFAULT_TOLERANCES)]
    tolerances: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Debug, Args)]
struct SweepPowerArgs {
    #[arg(long, default_value_t = harness::DEFAULT_USERS)]
    users: usize,
    #[arg(long, default_value_t = 1e-5)]
    tolerance: f64,
    #[arg(long, default_value_t = harness::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_values_t = harness::DEFAULT_POWERS)]
    powers: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Debug, Args)]
struct GainSweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = noma_maxmin::scenario::REFERENCE_GAINS)]
    gains: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = harness::DEFAULT_POWERS)]
    powers: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Core(Error),
    NotConverged,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NotConverged) => {
            eprintln!("error: iteration limit reached before convergence");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_IO
            })
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve(args) => solve(args),
        Command::Trace(args) => {
            let s = args.instance.load()?;
            let table = harness::run_convergence_trace(&s, args.tolerance)?;
            write_table(table, args.out)
        }
        Command::SweepTolerance(args) => {
            let table = harness::run_iterations_vs_tolerance(
                args.users,
                args.power,
                args.trials,
                &args.tolerances,
                args.seed,
                args.exec.execution(),
            )?;
            write_table(table, args.out)
        }
        Command::SweepPower(args) => {
            let table = harness::run_iterations_vs_power(
                args.users,
                args.tolerance,
                args.trials,
                &args.powers,
                args.seed,
                args.exec.execution(),
            )?;
            write_table(table, args.out)
        }
        Command::CompareSchemes(args) => write_table(
            harness::run_minrate_vs_power(&args.gains, &args.powers)?,
            args.out,
        ),
        Command::FairnessRatio(args) => write_table(
            harness::run_fairness_ratio_vs_power(&args.gains, &args.powers)?,
            args.out,
        ),
    }
}

fn write_table(mut table: ExperimentTable, out: Option<PathBuf>) -> Result<(), Failure> {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    table.set_meta("created_unix", now);
    match out {
        Some(path) => table.emit_csv(path)?,
        None => table.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let s = args.instance.load()?;
    let method = match args.method {
        Method::Power => SolveMethod::PowerIteration,
        Method::Bisection => SolveMethod::Bisection,
    };
    let stopping = match args.stopping {
        Stopping::Certified => StoppingRule::Certified,
        Stopping::MinRateChange => StoppingRule::MinRateChange,
    };
    let options = SolverOptions::with_tolerance(args.tolerance)
        .max_iterations(args.max_iterations)
        .stopping(stopping);
    let result = noma_maxmin::solve(&s, method, &options)?;
    let allocation = s.to_original_order(result.allocation.powers())?;

    let mut stdout = io::stdout().lock();
    let written = if args.json {
        writeln!(stdout, "{}", to_json(&s, &result, &allocation))
    } else {
        print_text(&mut stdout, &s, &result, &allocation)
    };
    written.map_err(|source| Error::Io {
        path: "<stdout>".into(),
        source,
    })?;

    if result.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn to_json(s: &Scenario, r: &SolveResult, allocation: &[f64]) -> String {
    let gains = s.to_original_order(s.gains()).expect("length matches");
    let value = json!({
        "label": s.label(),
        "method": r.method.name(),
        "gains": gains,
        "total_power": s.total_power(),
        "allocation": allocation,
        "fairness_rate": r.fairness_rate,
        "lambda_pf": r.lambda_pf,
        "iterations": r.iterations,
        "converged": r.converged,
        "bounds": {
            "lambda_lo": r.bounds.lambda_lo,
            "lambda_hi": r.bounds.lambda_hi,
            "rate_lo": r.bounds.rate_lo,
            "rate_hi": r.bounds.rate_hi,
        },
    });
    serde_json::to_string_pretty(&value).expect("json value serializes")
}

fn print_text(
    out: &mut impl Write,
    s: &Scenario,
    r: &SolveResult,
    allocation: &[f64],
) -> io::Result<()> {
    if let Some(label) = s.label() {
        writeln!(out, "scenario       {label}")?;
    }
    writeln!(out, "method         {}", r.method.name())?;
    writeln!(out, "users          {}", s.num_users())?;
    writeln!(out, "total power    {}", s.total_power())?;
    let powers: Vec<String> = allocation.iter().map(|p| format!("{p:.6}")).collect();
    writeln!(out, "allocation     [{}]", powers.join(", "))?;
    writeln!(out, "fairness rate  {:.9} bit/s/Hz", r.fairness_rate)?;
    writeln!(out, "lambda_pf      {:.9}", r.lambda_pf)?;
    writeln!(
        out,
        "lambda bounds  [{:.6}, {:.6}]",
        r.bounds.lambda_lo, r.bounds.lambda_hi
    )?;
    writeln!(
        out,
        "rate bounds    [{:.6}, {:.6}]",
        r.bounds.rate_lo, r.bounds.rate_hi
    )?;
    writeln!(out, "iterations     {}", r.iterations)?;
    writeln!(out, "converged      {}", r.converged)
}
