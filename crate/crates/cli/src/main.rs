//! `jdcc`: experiment harness for joint communication and control design.
//!
//! Each subcommand reads a scenario (defaults when `--config` is absent),
//! echoes it with its derived quantities, and writes one or more CSV files
//! into the output directory. Command-line flags take precedence over the
//! scenario file, which takes precedence over built-in defaults.
//!
//! Exit codes: 0 success, 1 acceptance-suite failure, 2 input error,
//! 3 internal numeric failure. Errors are also reported on stderr as a
//! one-line JSON record.

mod error;
mod experiments;
mod output;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jdcc_validate::{run_suite, SuiteConfig, DEFAULT_TRIALS};

use crate::error::{CliError, Result};
use crate::output::Table;
use crate::scenario::{Overrides, Scenario};

#[derive(Debug, Parser)]
#[command(name = "jdcc", version, about = "Joint communication and control experiments")]
struct Cli {
    /// Scenario file (TOML). Missing keys take reference values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// RNG seed; overrides `run.seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory; overrides `run.out`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Monte Carlo trials per estimate; overrides `run.trials`.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<u64>,
    /// Points per swept axis; overrides `run.grid`.
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Control variance over time, analytic and simulated.
    Trajectory,
    /// Steady-state variance over an uplink SNR × downlink SINR grid.
    StabilityMap,
    /// Variance as one link quality grows, against its limits.
    Asymptotics,
    /// Delay/variance boundaries of optimal, MRT and ZF beamforming.
    Regions,
    /// MRT vs ZF delay over downlink power and their crossover.
    Crossover,
    /// Comm-only and control-only outage over antennas and power.
    OutageSingle,
    /// Joint MRT/ZF outage over a requirement grid.
    OutageJoint,
    /// Full acceptance suite; ignores `run.trials` (default 1e6 unless
    /// `--trials` is given).
    Validate,
}

fn write_tables(tables: &[Table], sc: &Scenario) -> Result<()> {
    let dir = Path::new(&sc.file.run.out);
    for t in tables {
        let path = t.write(dir, sc)?;
        println!("wrote {} ({} rows)", path.display(), t.rows.len());
    }
    Ok(())
}

fn validate(sc: &Scenario, trials: Option<u64>) -> Result<()> {
    let cfg = SuiteConfig { seed: sc.seed(), trials: trials.unwrap_or(DEFAULT_TRIALS) };
    println!("acceptance suite: seed {}, {} trials per outage estimate", cfg.seed, cfg.trials);
    let report = run_suite(&cfg, |r| {
        println!("{r}");
        for c in &r.checks {
            let mark = if c.passed() { "ok  " } else { "FAIL" };
            println!("    {mark} {c}");
        }
    })?;

    let mut table = Table::new("validate", &jdcc_validate::CSV_HEADER);
    table.meta("trials", cfg.trials);
    for c in report.criteria.iter().flat_map(|r| &r.checks) {
        table.push(c.csv_record().to_vec());
    }
    write_tables(&[table], sc)?;

    let failed: Vec<String> = report
        .criteria
        .iter()
        .flat_map(|r| r.failures())
        .map(|c| {
            format!(
                "criterion {} check '{}': observed {:e}, expected {} {:e}, tolerance {:e}",
                c.criterion,
                c.name,
                c.observed,
                c.comparison.as_str(),
                c.expected,
                c.tolerance
            )
        })
        .collect();
    if failed.is_empty() {
        println!("all {} criteria passed", report.criteria.len());
        Ok(())
    } else {
        Err(CliError::ValidationFailed(failed.join("; ")))
    }
}

fn run(cli: &Cli) -> Result<()> {
    let overrides = Overrides { seed: cli.seed, trials: cli.trials, grid: cli.grid, out: cli.out.clone() };
    let sc = Scenario::load(cli.config.as_deref(), &overrides)?;
    print!("{}", sc.echo());
    let tables = match cli.command {
        Command::Trajectory => experiments::trajectory(&sc)?,
        Command::StabilityMap => experiments::stability_map(&sc)?,
        Command::Asymptotics => experiments::asymptotics(&sc)?,
        Command::Regions => experiments::regions(&sc)?,
        Command::Crossover => experiments::crossover(&sc)?,
        Command::OutageSingle => experiments::outage_single(&sc)?,
        Command::OutageJoint => experiments::outage_joint(&sc)?,
        Command::Validate => return validate(&sc, cli.trials),
    };
    write_tables(&tables, &sc)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            let err = CliError::input(e.kind().to_string());
            eprintln!("{}", err.record());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
