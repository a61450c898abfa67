//! `heegner`: command-line front end for the heegner-core library.
//!
//! Single queries (`classgroup`, `ldata`, `etacheck`, `heegner`, `sign`,
//! `point`) print one JSON document on stdout; `sweep` writes one CSV
//! file per selected task. Exit codes: 0 success (including refused
//! queries, which answer `{"refused": ...}`), 1 usage or input errors,
//! 2 internal mathematical consistency failures.
//!
//! Each task refuses precision below its floor instead of silently
//! degrading: classgroup and ldata need 16 bits, etacheck and heegner 32,
//! point 64, and every sweep 64.

mod fmt;
mod ingest;
mod single;
mod sweep;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use heegner_core::{Error, Result};

use sweep::{SweepConfig, Task};

#[derive(Parser)]
#[command(
    name = "heegner",
    version,
    about = "Class groups, L-data, eta invariants, root numbers, and \
             Heegner points at desk scale",
    max_term_width = 100
)]
struct Cli {
    /// Curve-table file; overrides the HEEGNER_CURVE_TABLE environment
    /// variable. Entries shadow the built-in curves by label.
    #[arg(long, global = true, value_name = "PATH")]
    curve_table: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Class group structure with an analytic class-number cross-check
    Classgroup {
        /// Negative discriminant
        #[arg(short = 'D', long = "disc", allow_hyphen_values = true)]
        disc: i64,
        /// Working precision in bits for the analytic route
        #[arg(long, default_value_t = 96)]
        prec: u32,
    },
    /// L(1), L'(1), and the logarithmic datum of a quadratic character
    Ldata {
        /// Negative fundamental discriminant
        #[arg(short = 'D', long = "disc", allow_hyphen_values = true)]
        disc: i64,
        #[arg(long, default_value_t = 128)]
        prec: u32,
    },
    /// Both routes of the limit identity with the residual and its bound
    Etacheck {
        /// Negative fundamental discriminant
        #[arg(short = 'D', long = "disc", allow_hyphen_values = true)]
        disc: i64,
        #[arg(long, default_value_t = 128)]
        prec: u32,
    },
    /// Orbit heights at a level, against the predicted mean
    Heegner {
        /// Negative fundamental discriminant
        #[arg(short = 'D', long = "disc", allow_hyphen_values = true)]
        disc: i64,
        /// Level (every prime of the level must split)
        #[arg(short = 'N', long = "level", default_value_t = 1)]
        level: u64,
        #[arg(long, default_value_t = 128)]
        prec: u32,
    },
    /// Functional-equation sign, local factors, and the level datum
    Sign {
        /// Curve label from the built-in or user curve table
        #[arg(long)]
        curve: String,
        /// Negative fundamental discriminant
        #[arg(short = 'D', long = "disc", allow_hyphen_values = true)]
        disc: i64,
    },
    /// Trace of a Heegner orbit through the modular parametrization
    Point {
        /// Curve label from the built-in or user curve table
        #[arg(long)]
        curve: String,
        /// Negative fundamental discriminant
        #[arg(short = 'D', long = "disc", allow_hyphen_values = true)]
        disc: i64,
        #[arg(long, default_value_t = 256)]
        prec: u32,
        /// Largest denominator tried when recognizing the trace
        #[arg(long, default_value_t = 100_000_000)]
        denom_bound: u64,
    },
    /// Range sweeps writing one CSV file per selected task
    Sweep {
        /// Root-number dichotomy rows (needs --curve)
        #[arg(long)]
        signs: bool,
        /// Orbit-height statistics rows at level -N
        #[arg(long)]
        heights: bool,
        /// Limit-identity residual rows
        #[arg(long)]
        eta: bool,
        /// Box-discrepancy rows at level -N
        #[arg(long)]
        equidist: bool,
        /// Logarithmic lower-bound rows
        #[arg(long)]
        minoration: bool,
        /// Trace-point pipeline rows (needs --curve)
        #[arg(long)]
        points: bool,
        /// Most negative discriminant of the range
        #[arg(long, allow_hyphen_values = true)]
        dmin: i64,
        /// Least negative discriminant of the range
        #[arg(long, allow_hyphen_values = true)]
        dmax: i64,
        /// Curve label, for the tasks that need one
        #[arg(long)]
        curve: Option<String>,
        /// Level for --heights and --equidist
        #[arg(short = 'N', long = "level", default_value_t = 1)]
        level: u64,
        #[arg(long, default_value_t = 128)]
        prec: u32,
        /// Output directory for the CSV files
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Concurrent row workers
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Largest denominator tried when recognizing traces in --points
        #[arg(long, default_value_t = 100_000_000)]
        denom_bound: u64,
    },
}

/// Refuse precision below the task's floor rather than degrade silently.
fn check_prec(task: &str, prec: u32, min: u32) -> Result<()> {
    if prec < min {
        return Err(Error::Parse(format!(
            "--prec {prec} is below the {task} minimum of {min} bits"
        )));
    }
    if prec > (1 << 20) {
        return Err(Error::Parse(format!(
            "--prec {prec} exceeds the 2^20-bit ceiling"
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Classgroup { disc, prec } => {
            check_prec("classgroup", prec, 16)?;
            single::classgroup(disc, prec)
        }
        Cmd::Ldata { disc, prec } => {
            check_prec("ldata", prec, 16)?;
            single::ldata(disc, prec)
        }
        Cmd::Etacheck { disc, prec } => {
            check_prec("etacheck", prec, 32)?;
            single::etacheck(disc, prec)
        }
        Cmd::Heegner { disc, level, prec } => {
            check_prec("heegner", prec, 32)?;
            single::heegner(disc, level, prec)
        }
        Cmd::Sign { curve, disc } => {
            let source = ingest::load_curves(cli.curve_table.as_deref())?;
            single::sign(source.find(&curve)?, disc)
        }
        Cmd::Point {
            curve,
            disc,
            prec,
            denom_bound,
        } => {
            check_prec("point", prec, 64)?;
            let source = ingest::load_curves(cli.curve_table.as_deref())?;
            single::point(source.find(&curve)?, disc, prec, denom_bound)
        }
        Cmd::Sweep {
            signs,
            heights,
            eta,
            equidist,
            minoration,
            points,
            dmin,
            dmax,
            curve,
            level,
            prec,
            out,
            jobs,
            denom_bound,
        } => {
            check_prec("sweep", prec, 64)?;
            let mut tasks = Vec::new();
            for (flag, task) in [
                (signs, Task::Signs),
                (heights, Task::Heights),
                (eta, Task::Eta),
                (equidist, Task::Equidist),
                (minoration, Task::Minoration),
                (points, Task::Points),
            ] {
                if flag {
                    tasks.push(task);
                }
            }
            let curve = match curve {
                Some(label) => {
                    let source = ingest::load_curves(cli.curve_table.as_deref())?;
                    Some(source.find(&label)?.clone())
                }
                None => None,
            };
            let cfg = SweepConfig {
                tasks,
                dmin,
                dmax,
                curve,
                level,
                prec,
                out,
                jobs,
                denom_bound,
            };
            sweep::run_sweep(&cfg)
        }
    }
}

fn main() {
    let cli = Cli::try_parse().unwrap_or_else(|e| {
        use clap::error::ErrorKind;
        let code = match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
            _ => 1,
        };
        let _ = e.print();
        std::process::exit(code);
    });
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("heegner: {err}");
            let code = if matches!(err, Error::Inconsistent(_)) {
                2
            } else {
                1
            };
            std::process::exit(code);
        }
    }
}
