//! `carousel`: batch driver for scans, audits and figures.
//!
//! Exit codes: 0 on success, 1 when an audit fails or a numerical or IO
//! error stops a run, 2 on usage errors.

pub mod config;
mod commands;
pub mod svg;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::config::{RunConfig, Settings, UsageError};

#[derive(Debug, Parser)]
#[command(name = "carousel", version, about = "Zindler carousels and floating bodies of density 1/6")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Period, turning points, radius extrema and bound margins over an energy grid
    PeriodScan,
    /// Integrate one orbit of the angle flow over a period
    Orbit,
    /// Trace the hexagon vertices and report the closure defect
    Reconstruct,
    /// Closure defect and radius residual over an energy grid
    ClosureScan,
    /// Audit every inequality behind the period bounds
    VerifyBounds,
    /// Rotation-quantisation feasibility table
    VerifyProof,
    /// SVG of level curves of H
    Levelsets,
    /// Side-length defect of polygons inscribed by arc length
    CarouselDefect,
}

#[derive(Debug, Default, Args)]
struct Flags {
    /// Energy grid `lo:hi:count` or a single value
    #[arg(long = "h", global = true, value_name = "LO:HI:COUNT")]
    h: Option<String>,
    /// Integrator step
    #[arg(long, global = true)]
    step: Option<String>,
    /// Output directory; without it the main table goes to stdout
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// `circle:R` or `ellipse:a,b`
    #[arg(long, global = true)]
    curve: Option<String>,
    /// Polygon vertex count
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    kmax: Option<String>,
    #[arg(long, global = true)]
    mmax: Option<String>,
    /// `csv` or `json`
    #[arg(long, global = true)]
    format: Option<String>,
    /// `key=value` file; flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Number of random curves for carousel-defect
    #[arg(long, global = true, value_name = "N")]
    random: Option<String>,
    /// Initial angle state `x,y`
    #[arg(long, global = true, value_name = "X,Y")]
    start: Option<String>,
    /// Comma-separated energies for levelsets
    #[arg(long, global = true)]
    levels: Option<String>,
    /// Named tolerance override `NAME=VALUE`
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

impl Flags {
    fn into_settings(self) -> Result<(Settings, Option<String>), UsageError> {
        let mut tolerances = std::collections::BTreeMap::new();
        for t in &self.tol {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| UsageError(format!("bad tolerance '{t}', expected NAME=VALUE")))?;
            tolerances.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok((
            Settings {
                h: self.h,
                step: self.step,
                out: self.out,
                curve: self.curve,
                n: self.n,
                kmax: self.kmax,
                mmax: self.mmax,
                format: self.format,
                seed: self.seed,
                random: self.random,
                start: self.start,
                levels: self.levels,
                tolerances,
            },
            self.config,
        ))
    }
}

/// Outcome of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    AuditFailed,
}

#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Failed(String),
}

impl From<UsageError> for RunError {
    fn from(e: UsageError) -> Self {
        RunError::Usage(e.0)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Failed(e.to_string())
    }
}

fn configure(flags: Flags) -> Result<RunConfig, UsageError> {
    let (settings, config_path) = flags.into_settings()?;
    let merged = match config_path {
        Some(path) => settings.over(Settings::load(&path)?),
        None => settings,
    };
    RunConfig::from_settings(&merged)
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let outcome = configure(cli.flags)
        .map_err(RunError::from)
        .and_then(|cfg| commands::dispatch(cli.command, &cfg));
    match outcome {
        Ok(Status::Pass) => 0,
        Ok(Status::AuditFailed) => 1,
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(RunError::Failed(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}
