//! Batch front-end for the polariton laboratory: run scenarios, sweep
//! parameter grids, compare records, and analyze absorption images.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver instability,
//! 3 I/O failure.

mod commands;
mod config;
mod error;
mod matio;
mod summary;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AnalyzeArgs, CommonArgs};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "eitlab",
    about = "1-D numerical laboratory for slow, stored, and stationary EIT polaritons",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a config file and write record, detectors,
    /// and analysis summary.
    Run {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: config out_dir, then
        /// `$EITLAB_OUT_ROOT/<scenario>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the record as flat little-endian binary instead of CSV.
        #[arg(long)]
        binary: bool,
        /// Override a scenario field, e.g. grid.dt_us=0.005 (repeatable).
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the `[sweep]` grid of a config on a worker pool and aggregate
    /// fitted vs analytic velocities.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        binary: bool,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Difference report between two record files (CSV or binary).
    Compare {
        record_a: PathBuf,
        record_b: PathBuf,
        /// Directory for the per-frame difference CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze an absorption image pair or a record file.
    Analyze {
        /// Record CSV/binary produced by `run`.
        #[arg(long, conflicts_with_all = ["i_out", "i_0"])]
        record: Option<PathBuf>,
        /// Transmission image (plain-text matrix or PGM).
        #[arg(long = "i-out", requires = "i_0")]
        i_out: Option<PathBuf>,
        /// Reference image without atoms.
        #[arg(long = "i0")]
        i_0: Option<PathBuf>,
        /// Transverse row range to integrate, as start:end.
        #[arg(long)]
        rows: Option<String>,
        /// Number of equal-atom bins.
        #[arg(long, default_value_t = 200)]
        bins: usize,
        /// Axis calibration of the images [m/pixel].
        #[arg(long, default_value_t = 1e-5)]
        m_per_px: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the named scenario presets.
    ListScenarios,
}

fn parse_rows(spec: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("--rows '{spec}' is not start:end")))?;
    let lo = a
        .parse()
        .map_err(|_| CliError::Config(format!("bad row '{a}'")))?;
    let hi = b
        .parse()
        .map_err(|_| CliError::Config(format!("bad row '{b}'")))?;
    if lo >= hi {
        return Err(CliError::Config(format!("empty row range '{spec}'")));
    }
    Ok((lo, hi))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            out,
            binary,
            overrides,
        } => commands::cmd_run(
            &config,
            &CommonArgs {
                out,
                overrides,
                binary,
            },
        ),
        Command::Sweep {
            config,
            out,
            binary,
            workers,
            overrides,
        } => commands::cmd_sweep(
            &config,
            &CommonArgs {
                out,
                overrides,
                binary,
            },
            workers,
        ),
        Command::Compare {
            record_a,
            record_b,
            out,
        } => commands::cmd_compare(&record_a, &record_b, out.as_deref()),
        Command::Analyze {
            record,
            i_out,
            i_0,
            rows,
            bins,
            m_per_px,
            out,
        } => {
            let rows = rows.as_deref().map(parse_rows).transpose()?;
            commands::cmd_analyze(&AnalyzeArgs {
                record,
                i_out,
                i_0,
                rows,
                bins,
                m_per_px,
                out,
            })
        }
        Command::ListScenarios => {
            commands::cmd_list_scenarios();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
