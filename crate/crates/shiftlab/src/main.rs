//! Command-line front end: run scenario files into reports, list the
//! shipped scenarios, and re-verify the witnesses inside a report.
//!
//! Exit codes: 0 on success, 2 for parse/IO problems, 3 for numerical
//! precondition failures, 4 when `verify` finds a witness that no longer
//! re-checks.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shiftlab::corpus;
use shiftlab::report::{AnalysisReport, EmitFormat};
use shiftlab::runner::{run_file, verify_report, RunOptions};
use shiftlab::scenario::parse_scenario;
use shiftlab::Error;

#[derive(Parser)]
#[command(
    name = "shiftlab",
    version,
    about = "Shift representations, Hankel rationality oracles, growth bounds, and cyclicity probes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a shipped scenario by name) into a report.
    Run {
        /// Path to a scenario TOML, or the name of a shipped scenario.
        file: String,
        /// Directory the report files are written into.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Report format: json, csv, or all.
        #[arg(long, default_value = "json")]
        format: String,
        /// Rescale every operator A ↦ A/(‖A‖+1) before running.
        #[arg(long)]
        contract: bool,
        /// Fail where an algebraic decision would fall back to floats.
        #[arg(long)]
        exact: bool,
    },
    /// Print the shipped scenario names with their descriptions.
    ListScenarios,
    /// Recompute every witness in a report from its embedded scenario.
    Verify {
        /// Path to a report JSON produced by `run`.
        report: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> shiftlab::Result<ExitCode> {
    match cli.command {
        Command::Run {
            file,
            out,
            format,
            contract,
            exact,
        } => {
            let fmt = EmitFormat::parse(&format)?;
            let opts = RunOptions { contract, exact };
            let report = load_and_run(&file, &opts)?;
            std::fs::create_dir_all(&out)?;
            for path in report.write(&out, fmt)? {
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListScenarios => {
            for (name, source) in corpus::SHIPPED {
                let file = parse_scenario(source)?;
                println!("{name}: {}", file.description.unwrap_or_default());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { report } => {
            let bytes = std::fs::read(&report)?;
            let parsed = AnalysisReport::from_json_bytes(&bytes)?;
            let outcome = verify_report(&parsed)?;
            if outcome.ok() {
                println!(
                    "ok: {} witness(es) in `{}` re-verified",
                    outcome.witnesses, parsed.scenario
                );
                Ok(ExitCode::SUCCESS)
            } else {
                for failure in &outcome.failures {
                    eprintln!("FAIL {failure}");
                }
                println!(
                    "verify: {} failure(s) across {} witness(es) in `{}`",
                    outcome.failures.len(),
                    outcome.witnesses,
                    parsed.scenario
                );
                Ok(ExitCode::from(4))
            }
        }
    }
}

fn load_and_run(spec: &str, opts: &RunOptions) -> shiftlab::Result<AnalysisReport> {
    let path = Path::new(spec);
    if path.exists() {
        return run_file(path, opts);
    }
    if let Some(source) = corpus::find(spec) {
        return corpus::run_source(source, opts);
    }
    Err(Error::Io(std::io::Error::new(
        std::io::ErrorKind::NotFound,
        format!("no such file or shipped scenario: `{spec}`"),
    )))
}
