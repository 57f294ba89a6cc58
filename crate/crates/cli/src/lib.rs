//! Command-line front end for `freqhmm`.
//!
//! The binary is a thin wrapper over [`run`], so tests can drive the same
//! code path in-process.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod measurements;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{execute, Command};
pub use config::{parse_config, parse_config_str, RunConfig, SweepGrid};
pub use error::{CliError, Issue, IssueList};
pub use measurements::{load_measurements, parse_measurements, MeasurementSeries};

#[derive(Debug, Parser)]
#[command(name = "freqhmm", version, about = "Grid-frequency deviation state estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,

    /// Run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Measurement CSV (`k,z_hz` or `timestamp,z_hz`), for detect and decode.
    #[arg(long, global = true, value_name = "CSV")]
    pub input: Option<PathBuf>,

    /// Output file; `stdout` or `-` writes to standard output.
    #[arg(long, global = true, value_name = "PATH|stdout", default_value = "stdout")]
    pub output: String,

    /// Base seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Trial count, overriding the config.
    #[arg(long, global = true)]
    pub trials: Option<usize>,

    /// Worker threads for montecarlo (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Sub {
    /// Print the emission matrix R and the detector thresholds.
    Emission,
    /// Classify each measurement: `k,z_hz,x`.
    Detect,
    /// Classify, then Viterbi-decode: `k,z_hz,x,s_star`.
    Decode,
    /// Generate a synthetic trace: `k,s,z_hz,x`.
    Simulate,
    /// HT vs VA accuracy histograms: `bin_lo_pct,bin_hi_pct,ht_count,va_count`.
    Montecarlo,
    /// Detection probability against SNR: `snr_db,sigma,pd_neg,pd_zero,pd_pos,status`.
    Sweep,
    /// State distribution for horizons 0..m: `m,p_neg,p_zero,p_pos`.
    Predict,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Emission => Command::Emission,
            Sub::Detect => Command::Detect,
            Sub::Decode => Command::Decode,
            Sub::Simulate => Command::Simulate,
            Sub::Montecarlo => Command::MonteCarlo,
            Sub::Sweep => Command::Sweep,
            Sub::Predict => Command::Predict,
        }
    }
}

fn is_stdout(output: &str) -> bool {
    output == "stdout" || output == "-"
}

/// Runs one invocation. The table goes to `--output` (or `stdout`) and the
/// returned summary line is meant for stderr.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<String, CliError> {
    let command = Command::from(cli.command);
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Validation("--config <path> is required".into()))?;
    let mut cfg = parse_config(config_path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        if trials == 0 {
            return Err(CliError::Validation("--trials must be at least 1".into()));
        }
        cfg.trials = trials;
    }

    let input = match (&cli.input, command.needs_input()) {
        (Some(path), true) => Some(load_measurements(path)?),
        (None, true) => {
            return Err(CliError::Validation("this command needs --input <csv>".into()))
        }
        (Some(_), false) => {
            log::warn!("--input is ignored by this command");
            None
        }
        (None, false) => None,
    };

    // Build the whole table before touching the destination so a failed run
    // never leaves a truncated file behind.
    let mut buffer = Vec::new();
    let summary = match cli.threads {
        Some(0) => return Err(CliError::Validation("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(format!("cannot start thread pool: {e}")))?
            .install(|| execute(command, &cfg, input.as_ref(), &mut buffer))?,
        None => execute(command, &cfg, input.as_ref(), &mut buffer)?,
    };

    if is_stdout(&cli.output) {
        stdout
            .write_all(&buffer)
            .and_then(|()| stdout.flush())
            .map_err(|e| CliError::io("stdout", e))?;
    } else {
        std::fs::write(&cli.output, &buffer).map_err(|e| CliError::io(&cli.output, e))?;
    }
    Ok(summary)
}
