//! `pjet`: runs the verification suites and searches, printing key-sorted JSON.
//!
//! Exit codes: 0 all checks passed, 1 some check failed, 2 usage error,
//! 3 a mathematical precondition failed (with a witness in the JSON).

mod commands;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{CommandError, CurveArgs, L11Args, VerifyCoreArgs};

#[derive(Debug, Parser)]
#[command(name = "pjet", version, about = "p-derivations, jet spaces and delta-characters of elliptic curves")]
struct Cli {
    /// Print a human-readable summary instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Include wall-clock time; the output then stops being reproducible.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Delta axioms, Witt ghost map and the jet square over R_{d,k}.
    VerifyCore(VerifyCoreArgs),
    /// psi_2, its additivity and the order-1 character search for one curve.
    CurveReport(CurveArgs),
    /// The logarithmic derivative on genuine and perturbed second jets.
    L11delta(L11Args),
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("PJET_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("PJET_THREADS must be a positive integer (got {raw:?})"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let start = Instant::now();
    let (name, config, result) = match &cli.command {
        Command::VerifyCore(a) => ("verify-core", serde_json::to_value(a), commands::verify_core(a)),
        Command::CurveReport(a) => ("curve-report", serde_json::to_value(a), commands::curve(a)),
        Command::L11delta(a) => ("l11delta", serde_json::to_value(a), commands::l11delta(a)),
    };
    let timing = cli.timing.then(|| start.elapsed());
    match result {
        Ok(report) => {
            if cli.pretty {
                print!("{}", report.render_pretty(timing));
            } else {
                println!("{}", serde_json::to_string(&report.to_json(timing)).expect("json"));
            }
            ExitCode::from(if report.passed() { 0 } else { 1 })
        }
        Err(CommandError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CommandError::Domain { kind, message, witness }) => {
            eprintln!("error: {message}");
            let config = config.expect("flags serialize");
            let v = report::domain_error(name, config, kind, &message, witness);
            println!("{}", serde_json::to_string(&v).expect("json"));
            ExitCode::from(3)
        }
    }
}
