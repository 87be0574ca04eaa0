//! `bell` — exact values, Monte-Carlo simulation and verification reports
//! for the CHSH polarisation experiment.

mod angle;
mod battery;
mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bell_core::experiment::SamplingSource;

use commands::{cmd_exact, cmd_lhv, cmd_simulate, cmd_trace_theorem, cmd_verify, Correction};
use config::{ConfigFile, Resolved};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "bell",
    version,
    about = "Exact and Monte-Carlo models of the CHSH polarisation experiment",
    after_help = "Angles accept radians or pi-fractions (pi/8, 3pi/8, -pi/4). \
                  The BELL_SEED environment variable supplies the default seed. \
                  Exit codes: 0 ok, 1 usage error, 2 verification failure, 3 runtime error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Four polariser angles: a1 a2 b1 b2.
    #[arg(long, num_args = 4, value_names = ["A1", "A2", "B1", "B2"], global = false)]
    angles: Option<Vec<String>>,
    /// TOML file supplying defaults for the flags of this command.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Emit the machine-readable JSON report instead of tables.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SeededArgs {
    /// 64-bit seed for all randomness of this invocation.
    #[arg(long)]
    seed: Option<u64>,
    /// Use the data-parallel engine (per-batch RNG streams).
    #[arg(long)]
    parallel: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exact per-setting correlators, outcome tables and the CHSH value.
    Exact {
        #[command(flatten)]
        common: CommonArgs,
        /// Apply correction factors, e.g. --correct F=0.984,T=0.971
        #[arg(long, value_name = "F=..,T=..")]
        correct: Option<String>,
        /// Emit the probability table as CSV (a,b,p,q,probability).
        #[arg(long, conflicts_with = "json")]
        csv: bool,
    },
    /// Run the seeded Monte-Carlo experiment and estimate S.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        seeded: SeededArgs,
        /// Number of runs k.
        #[arg(long)]
        runs: Option<u64>,
        /// Sampling distribution: quantum-exact or bell-measure.
        #[arg(long, value_parser = parse_source)]
        source: Option<SamplingSource>,
        /// Emit the tally (and estimate) as CSV.
        #[arg(long, conflicts_with = "json")]
        csv: bool,
    },
    /// Run the full verification battery; nonzero exit on any failure.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        seeded: SeededArgs,
        /// Random local models probed by the bound check.
        #[arg(long)]
        trials: Option<u64>,
        /// Fault injection: corrupt one projector before checking.
        #[arg(long, hide = true)]
        tamper_pvm: bool,
    },
    /// Probe the local-model bound and report the best local strategy.
    Lhv {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        seeded: SeededArgs,
        /// Random local models to sample.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Check the partial-trace relation between joint and local measurements.
    TraceTheorem {
        #[command(flatten)]
        common: CommonArgs,
        /// Seed for the random-settings sweep.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of random settings to sweep.
        #[arg(long)]
        trials: Option<u64>,
    },
}

fn parse_source(text: &str) -> Result<SamplingSource, String> {
    match text {
        "quantum-exact" => Ok(SamplingSource::QuantumExact),
        "bell-measure" => Ok(SamplingSource::BellMeasure),
        other => Err(format!(
            "bad source '{other}': expected quantum-exact or bell-measure"
        )),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Exact {
            common,
            correct,
            csv,
        } => {
            let file = ConfigFile::load(common.config.as_deref())?;
            let resolved = Resolved::from_inputs(
                common.angles.as_deref(),
                None,
                None,
                None,
                None,
                false,
                &file,
            )?;
            let correction = correct.as_deref().map(Correction::parse).transpose()?;
            emit(cmd_exact(&resolved, correction)?, common.json, csv)
        }
        Command::Simulate {
            common,
            seeded,
            runs,
            source,
            csv,
        } => {
            let file = ConfigFile::load(common.config.as_deref())?;
            let resolved = Resolved::from_inputs(
                common.angles.as_deref(),
                seeded.seed,
                runs,
                None,
                source,
                seeded.parallel,
                &file,
            )?;
            emit(cmd_simulate(&resolved)?, common.json, csv)
        }
        Command::Verify {
            common,
            seeded,
            trials,
            tamper_pvm,
        } => {
            let file = ConfigFile::load(common.config.as_deref())?;
            let resolved = Resolved::from_inputs(
                common.angles.as_deref(),
                seeded.seed,
                None,
                trials,
                None,
                seeded.parallel,
                &file,
            )?;
            emit(cmd_verify(&resolved, tamper_pvm)?, common.json, false)
        }
        Command::Lhv {
            common,
            seeded,
            trials,
        } => {
            let file = ConfigFile::load(common.config.as_deref())?;
            let resolved = Resolved::from_inputs(
                common.angles.as_deref(),
                seeded.seed,
                None,
                trials,
                None,
                seeded.parallel,
                &file,
            )?;
            emit(cmd_lhv(&resolved)?, common.json, false)
        }
        Command::TraceTheorem {
            common,
            seed,
            trials,
        } => {
            let file = ConfigFile::load(common.config.as_deref())?;
            let resolved = Resolved::from_inputs(
                common.angles.as_deref(),
                seed,
                None,
                trials,
                None,
                false,
                &file,
            )?;
            emit(cmd_trace_theorem(&resolved)?, common.json, false)
        }
    }
}

fn emit(output: commands::CommandOutput, json: bool, csv: bool) -> Result<(), CliError> {
    if json {
        print!("{}", output.report.to_json());
    } else if csv {
        let body = output
            .csv
            .ok_or_else(|| CliError::usage("this command has no CSV format"))?;
        print!("{body}");
    } else {
        print!("{}", output.human);
    }
    if let Some(reason) = output.verification_failure {
        return Err(CliError::verification(reason));
    }
    Ok(())
}
