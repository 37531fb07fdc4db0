//! `qef`: command-line front end for exponential moments of quadratic forms.
//!
//! Exit codes: 0 on success, 1 on malformed input (bad flags, unreadable
//! or ill-formed problem file), 2 on domain errors such as an infeasible
//! functional or a branch cut. Domain errors still produce a report.

mod commands;
mod problem;
mod report;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use commands::{Outcome, Settings};
use problem::ProblemFile;

#[derive(Debug)]
pub enum CliError {
    Malformed(String),
    Domain(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Malformed(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<qef_core::Error> for CliError {
    fn from(e: qef_core::Error) -> Self {
        if e.is_malformed_input() {
            CliError::Malformed(e.to_string())
        } else {
            CliError::Domain(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "qef", version, about = "Exponential moments of quadratic forms in Gaussian quantum states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize, Clone, Debug)]
struct Common {
    /// Problem file (JSON).
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Monte Carlo sample count; 0 disables sampling.
    #[arg(long)]
    samples: Option<usize>,
    /// Fock levels per mode.
    #[arg(long)]
    truncation: Option<usize>,
    /// Agreement tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Sample even when the estimator has no finite mean.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the functional (or a risk sweep).
    Qef(Common),
    /// E Y and E Y Y^dag for products of Gaussian exponentials.
    ProductMoment(Common),
    /// Three-factor 2x2 symplectic factorization.
    Factorize2 {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Coefficient of the commutator of two quadratic forms.
    Commutator(Common),
    /// Single-exponential form of a product of quadratic exponentials.
    Product(Common),
    /// Recursive single-exponential form of a multiplicative cost.
    Recursion(Common),
    /// Compare closed forms with the Fock and Monte Carlo oracles.
    OracleCheck(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Qef(c)
            | Command::ProductMoment(c)
            | Command::Commutator(c)
            | Command::Product(c)
            | Command::Recursion(c)
            | Command::OracleCheck(c) => c,
            Command::Factorize2 { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Qef(_) => "qef",
            Command::ProductMoment(_) => "product-moment",
            Command::Factorize2 { .. } => "factorize2",
            Command::Commutator(_) => "commutator",
            Command::Product(_) => "product",
            Command::Recursion(_) => "recursion",
            Command::OracleCheck(_) => "oracle-check",
        }
    }

    fn echo(&self) -> Value {
        let mut flags = serde_json::to_value(self.common()).expect("flags serialize");
        if let Command::Factorize2 { a, b, theta, .. } = self {
            flags["a"] = json!(a);
            flags["b"] = json!(b);
            flags["theta"] = json!(theta);
        }
        json!({"name": self.name(), "flags": flags})
    }
}

fn load(common: &Common) -> Result<ProblemFile, CliError> {
    let path = common
        .problem
        .as_ref()
        .ok_or_else(|| CliError::Malformed("--problem is required for this subcommand".into()))?;
    ProblemFile::load(path)
}

/// Returns the echoed inputs and the outcome.
fn execute(command: &Command) -> Result<(Value, Result<Outcome, CliError>), CliError> {
    let c = command.common();
    let settings = Settings {
        seed: c.seed,
        samples: c.samples,
        truncation: c.truncation,
        tol: c.tol,
        force: c.force,
    };
    if let Command::Factorize2 { a, b, theta, .. } = command {
        let inputs = json!({"a": a, "b": b, "theta": theta});
        return Ok((inputs, commands::factorize2(*a, *b, *theta, &settings)));
    }
    let p = load(c)?;
    let inputs = serde_json::to_value(&p).expect("problem serializes");
    let outcome = match command {
        Command::Qef(_) => commands::qef(&p, &settings),
        Command::ProductMoment(_) => commands::product_moment(&p, &settings),
        Command::Commutator(_) => commands::commutator(&p),
        Command::Product(_) => commands::product(&p),
        Command::Recursion(_) => commands::recursion(&p),
        Command::OracleCheck(_) => commands::oracle_check(&p, &settings),
        Command::Factorize2 { .. } => unreachable!("handled above"),
    };
    Ok((inputs, outcome))
}

fn emit(bytes: &[u8], out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Malformed(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Malformed(format!("cannot write report: {e}"))),
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (inputs, outcome) = execute(&cli.command)?;
    let (status, diagnostic, outputs) = match outcome {
        Ok(Outcome {
            outputs,
            diagnostic: None,
        }) => ("ok", None, outputs),
        Ok(Outcome {
            outputs,
            diagnostic: Some(d),
        }) => ("domain_error", Some(d), outputs),
        Err(CliError::Domain(d)) => ("domain_error", Some(d), Value::Null),
        Err(e @ CliError::Malformed(_)) => return Err(e),
    };
    let doc = json!({
        "schema_version": report::SCHEMA_VERSION,
        "tool": {"name": "qef", "version": env!("CARGO_PKG_VERSION")},
        "command": cli.command.echo(),
        "seed": cli.command.common().seed,
        "inputs_digest": report::digest(&inputs),
        "inputs": inputs,
        "status": status,
        "diagnostic": diagnostic,
        "outputs": outputs,
    });
    emit(&report::to_pretty(&doc), cli.command.common().out.as_ref())?;
    if let Some(d) = diagnostic {
        eprintln!("qef: {d}");
        return Ok(false);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("qef: error: {e}");
            ExitCode::from(1)
        }
    }
}
