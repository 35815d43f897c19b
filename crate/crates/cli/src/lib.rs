//! Command-line front end: scenario files in, snapshot streams and study
//! reports out.
//!
//! Exit codes: 0 completed, 1 failed `check`, 2 configuration error,
//! 3 breakdown, 4 divergence, 5 I/O error.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::{status_exit, Console};
use crate::config::{parse_config, ConfigError, Scenario};
pub use crate::error::{CliError, Exit};

#[derive(Debug, Parser)]
#[command(name = "peakflow", version, about = "Lagrangian solver for the Camassa-Holm and Degasperis-Procesi equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory. Defaults to `output.dir` from the scenario, then `out/<name>`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Suppress progress messages on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario; writes snapshots.ndjson and diagnostics.csv.
    Run(Common),
    /// Run the scenario's [convergence] ladder and report observed orders.
    Converge(Common),
    /// Compare the scenario with amplitude-perturbed data.
    ///
    /// Distances are reported in H^1 only: the data-to-solution map is not
    /// continuous in W^{1,inf}, so sup-norm gradient distances would not
    /// shrink with the perturbation.
    Depend {
        #[command(flatten)]
        common: Common,
        /// Amplitude shift; overrides `dependence.delta`.
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
    },
    /// Run the scenario once per value of its [sweep] parameter, in parallel.
    Sweep(Common),
    /// Run the randomized invariant suites.
    Check {
        /// Seed for the random inputs.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        quiet: bool,
    },
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(parse_config(&text, base)?)
}

/// Output directory: `--out`, else `output.dir` relative to the scenario file, else `out/<name>`.
pub fn output_dir(common: &Common, scenario: &Scenario) -> PathBuf {
    if let Some(out) = &common.out {
        return out.clone();
    }
    match &scenario.output_dir {
        Some(dir) => common.config.parent().unwrap_or(Path::new(".")).join(dir),
        None => Path::new("out").join(&scenario.name),
    }
}

/// Caps the global rayon pool from `PEAKFLOW_THREADS`.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PEAKFLOW_THREADS") else {
        return Ok(());
    };
    let threads: usize = match raw.trim().parse() {
        Ok(n) if n >= 1 => n,
        _ => return Err(ConfigError::single("PEAKFLOW_THREADS", format!("expected a positive integer, got `{raw}`")).into()),
    };
    // a second call (tests, embedding) keeps the existing pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn execute(cli: Cli) -> Result<Exit, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Run(common) => {
            let scenario = load_scenario(&common.config)?;
            let console = Console { quiet: common.quiet };
            let summary = commands::run_scenario(&scenario, &output_dir(&common, &scenario), console)?;
            Ok(status_exit(summary.status))
        }
        Command::Converge(common) => {
            let scenario = load_scenario(&common.config)?;
            commands::run_convergence(&scenario, &output_dir(&common, &scenario), Console { quiet: common.quiet })?;
            Ok(Exit::Completed)
        }
        Command::Depend { common, delta } => {
            let scenario = load_scenario(&common.config)?;
            let delta = delta.unwrap_or(scenario.delta);
            if !delta.is_finite() {
                return Err(ConfigError::single("--delta", "must be finite").into());
            }
            commands::run_dependence(&scenario, delta, &output_dir(&common, &scenario), Console { quiet: common.quiet })?;
            Ok(Exit::Completed)
        }
        Command::Sweep(common) => {
            let scenario = load_scenario(&common.config)?;
            commands::run_sweep(&scenario, &output_dir(&common, &scenario), Console { quiet: common.quiet })?;
            Ok(Exit::Completed)
        }
        Command::Check { seed, quiet } => {
            let results = check::run_checks(seed);
            let console = Console { quiet };
            for r in &results {
                console.say(format!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail));
            }
            Ok(if results.iter().all(|r| r.passed) { Exit::Completed } else { Exit::CheckFailed })
        }
    }
}
