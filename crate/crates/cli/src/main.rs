//! `qndsim` — command-line front end for the finite-resolution quadrature
//! measurement simulator.
//!
//! Each subcommand runs one analysis and writes a machine-readable dataset
//! (CSV with a JSON metadata header line, or pure JSON). Outputs embed the
//! full effective configuration and are byte-identical across reruns with
//! the same configuration.
//!
//! Exit codes: 0 success, 1 validation error, 2 verification failure,
//! 3 I/O error.

mod commands;
mod config;
mod output;

use clap::Parser;

use config::CommonOpts;

/// Application-level error, carrying the process exit code.
#[derive(Debug)]
pub enum AppError {
    /// Bad parameters or unmet preconditions.
    Validation(String),
    /// A cross-check or internal consistency verification failed.
    Verification(String),
    /// Reading or writing files failed.
    Io(String),
}

impl AppError {
    fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation(_) => 1,
            AppError::Verification(_) => 2,
            AppError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Validation(msg) => write!(f, "validation: {msg}"),
            AppError::Verification(msg) => write!(f, "verification: {msg}"),
            AppError::Io(msg) => write!(f, "i/o: {msg}"),
        }
    }
}

impl From<qndsim::Error> for AppError {
    fn from(e: qndsim::Error) -> Self {
        use qndsim::Error::*;
        match e {
            // Numerical cross-checks and consistency guards.
            RouteDisagreement { .. }
            | NotHermitian { .. }
            | IntegrationNonconvergence { .. }
            | EdgeContamination { .. } => AppError::Verification(e.to_string()),
            // Everything else is a precondition on the supplied parameters.
            _ => AppError::Validation(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qndsim",
    version,
    about = "Simulator for finite-resolution quadrature measurements of a light mode",
    long_about = "Runs the analyses of the qndsim library and writes plot-ready datasets: \
                  outcome distributions and their excitation split, conditional-state \
                  geometry, the resolution-independent squared-outcome/photon correlation, \
                  Monte Carlo estimates, and cross-path verification reports."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Outcome distribution P with its no-excitation (P0) and excitation (PQJ) split
    Distributions(CommonOpts),
    /// Uncertainty ellipses before and after conditioning on an outcome
    Poststate(CommonOpts),
    /// Correlation sweep across resolutions: closed form, number basis, Monte Carlo
    Correlation(CommonOpts),
    /// Excitation statistics: closed forms vs grid integration
    #[command(name = "jump-stats")]
    JumpStats(CommonOpts),
    /// Cross-path verification report (closed form vs number basis vs two-mode)
    #[command(name = "oracle-check")]
    OracleCheck(CommonOpts),
    /// Operator-ordering table over interior number states
    Ordering(CommonOpts),
    /// Monte Carlo estimates with standard errors and references
    Mc(CommonOpts),
}

impl Command {
    fn dispatch(&self) -> (&'static str, &CommonOpts) {
        match self {
            Command::Distributions(o) => ("distributions", o),
            Command::Poststate(o) => ("poststate", o),
            Command::Correlation(o) => ("correlation", o),
            Command::JumpStats(o) => ("jump-stats", o),
            Command::OracleCheck(o) => ("oracle-check", o),
            Command::Ordering(o) => ("ordering", o),
            Command::Mc(o) => ("mc", o),
        }
    }
}

fn execute(name: &'static str, opts: &CommonOpts) -> Result<(), AppError> {
    let cfg = config::resolve(name, opts)?;
    let (dataset, failures) = match name {
        "distributions" => commands::distributions(&cfg),
        "poststate" => commands::poststate(&cfg),
        "correlation" => commands::correlation(&cfg),
        "jump-stats" => commands::jump_stats(&cfg),
        "oracle-check" => commands::oracle_check(&cfg),
        "ordering" => commands::ordering(&cfg),
        "mc" => commands::mc(&cfg),
        _ => unreachable!("unknown command {name}"),
    }?;
    let content = dataset.render(cfg.format);
    output::write(&cfg.out, &content, cfg.out_is_default)?;
    println!("wrote {}", cfg.out.display());
    if !failures.is_empty() {
        return Err(AppError::Verification(format!(
            "checks failed: {} (see {})",
            failures.join(", "),
            cfg.out.display()
        )));
    }
    Ok(())
}


fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; anything else is a
            // validation error under the exit-code contract.
            let code = if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                0
            } else {
                1
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (name, opts) = cli.command.dispatch();
    match execute(name, opts) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
