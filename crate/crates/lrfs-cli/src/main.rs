//! Command-line front end for the labeled multitarget tracking toolkit.
//!
//! Subcommands:
//! - `run`      — simulate a scenario, run the exact labeled filter over it,
//!                and report every step plus the reassembled tracks.
//! - `simulate` — generate ground truth and scans only (no filtering, so no
//!                filter-size caps apply).
//! - `report`   — run the scenario and print only the aggregate summary.
//! - `audit`    — run the representation audit checks on canned fixtures.
//!
//! Exit codes: 0 success, 1 audit failure, 2 configuration error (unreadable
//! or invalid config, unwritable output, scenario outside the filter caps),
//! 3 runtime filter error (canonically a zero-probability scan).
//!
//! Output is deterministic: identical configuration and seed produce
//! byte-identical reports.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lrfs_cli::audit::{all_passed, render_audit, run_audit};
use lrfs_cli::config::{parse_config, ScenarioConfig};
use lrfs_cli::runner::{render_report, render_run, render_simulation, run, OutputFormat, RunError};
use lrfs_cli::scenario::simulate;

const EXIT_AUDIT_FAILURE: u8 = 1;
const EXIT_CONFIG_ERROR: u8 = 2;
const EXIT_RUNTIME_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lrfs-cli",
    version,
    about = "Labeled multitarget tracking on small grids: simulate, filter, audit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and run the exact labeled filter over it.
    Run(ScenarioArgs),
    /// Generate ground truth and scans without filtering.
    Simulate(ScenarioArgs),
    /// Run the scenario and print only the aggregate summary.
    Report(ScenarioArgs),
    /// Run the representation audit checks.
    Audit {
        /// Write the output here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format.
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Path to the scenario configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Seed override; replaces the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Human-readable report.
    #[default]
    Text,
    /// Line-delimited records, one per step and record kind.
    Records,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => OutputFormat::Text,
            Format::Records => OutputFormat::Records,
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(dispatch(Cli::parse()))
}

fn dispatch(cli: Cli) -> u8 {
    match cli.command {
        Command::Run(args) => scenario_command(&args, |config, seed, format| {
            let report = run(config, seed)?;
            Ok(render_run(&report, config, format))
        }),
        Command::Simulate(args) => scenario_command(&args, |config, seed, format| {
            let sim = simulate(config, seed);
            Ok(render_simulation(&sim, config, seed, format))
        }),
        Command::Report(args) => scenario_command(&args, |config, seed, format| {
            let report = run(config, seed)?;
            Ok(render_report(&report, format))
        }),
        Command::Audit { out, format } => {
            let checks = run_audit();
            let rendered = render_audit(&checks, format.into());
            if let Err(code) = emit(&rendered, out.as_deref()) {
                return code;
            }
            if all_passed(&checks) {
                0
            } else {
                EXIT_AUDIT_FAILURE
            }
        }
    }
}

/// Shared flow of the scenario subcommands: load, parse, seed-resolve,
/// produce, emit — with uniform error-to-exit-code mapping.
fn scenario_command(
    args: &ScenarioArgs,
    produce: impl FnOnce(&ScenarioConfig, u64, OutputFormat) -> Result<String, RunError>,
) -> u8 {
    let text = match fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return EXIT_CONFIG_ERROR;
        }
    };
    let config = match parse_config(&text) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG_ERROR;
        }
    };
    let seed = args.seed.unwrap_or(config.seed);
    match produce(&config, seed, args.format.into()) {
        Ok(rendered) => match emit(&rendered, args.out.as_deref()) {
            Ok(()) => 0,
            Err(code) => code,
        },
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Maps a run failure to its exit code: scenarios the filter cannot take are
/// configuration errors; failures inside the filter are runtime errors.
fn exit_code_for(error: &RunError) -> u8 {
    match error {
        RunError::Limits(_) => EXIT_CONFIG_ERROR,
        RunError::Filter(_) => EXIT_RUNTIME_ERROR,
    }
}

fn emit(rendered: &str, out: Option<&Path>) -> Result<(), u8> {
    match out {
        Some(path) => fs::write(path, rendered).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            EXIT_CONFIG_ERROR
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(rendered.as_bytes()).map_err(|e| {
                eprintln!("error: cannot write to stdout: {e}");
                EXIT_CONFIG_ERROR
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lrfs::exact_filter::FilterError;
    use lrfs_cli::config::{ConfigError, Violation};

    #[test]
    fn exit_codes_follow_the_documented_contract() {
        let limits = RunError::Limits(ConfigError::Invalid(vec![Violation {
            path: "time.horizon".into(),
            message: "too long".into(),
        }]));
        assert_eq!(exit_code_for(&limits), EXIT_CONFIG_ERROR);
        let degenerate = RunError::Filter(FilterError::DegenerateUpdate { time: 3 });
        assert_eq!(exit_code_for(&degenerate), EXIT_RUNTIME_ERROR);
    }

    #[test]
    fn cli_declaration_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
