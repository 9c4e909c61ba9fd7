//! `pathsel`: simulate drive chains, analyze traces, model the source and
//! plot the resulting reports.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::EXIT_VALIDATION;

#[derive(Parser, Debug)]
#[command(name = "pathsel", version, about)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, env = "PATHSEL_CONFIG")]
    pub config: Option<PathBuf>,

    /// One base seed, or one seed per trace (comma separated).
    #[arg(long, global = true, env = "PATHSEL_SEED", value_delimiter = ',')]
    pub seed: Vec<u64>,

    /// Pulse repetition rate in Hz.
    #[arg(long = "rep-rate", global = true, env = "PATHSEL_REP_RATE")]
    pub rep_rate: Option<f64>,

    /// Number of traces to simulate.
    #[arg(long = "n-traces", global = true, env = "PATHSEL_N_TRACES")]
    pub n_traces: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, env = "PATHSEL_OUT", default_value = "out")]
    pub out: PathBuf,

    /// Config override `dotted.key=value`; repeatable. The environment
    /// variable takes a `;`-separated list.
    #[arg(
        long = "override",
        global = true,
        env = "PATHSEL_OVERRIDE",
        value_delimiter = ';'
    )]
    pub overrides: Vec<String>,

    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignalArg {
    /// Drive-proportional amplitude (1.0 = pi).
    Amplitude,
    /// Optical intensity behind the modulator.
    Intensity,
}

#[derive(Subcommand, Debug)]
pub enum Verb {
    /// Simulate traces and nominal patterns.
    Simulate,
    /// Phase correlation statistics; several directories give one curve per rate.
    AnalyzePhase {
        #[arg(required = true)]
        trace_dirs: Vec<PathBuf>,
        /// What the samples of traces without a manifest represent.
        #[arg(long, value_enum)]
        signal: Option<SignalArg>,
    },
    /// Peak intensity by spacing for ON/OFF selection traces.
    AnalyzeIntensity {
        #[arg(required = true)]
        trace_dirs: Vec<PathBuf>,
    },
    /// ε between averaged pulse groups (one subdirectory of traces per group).
    Distinguishability { groups_dir: PathBuf },
    /// Fringe scan and visibility of the gain-switched source model.
    Visibility,
    /// Angular drift of a polarimeter log.
    Drift {
        log: PathBuf,
        /// Threshold in radians (default 0.007 pi).
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Render a report table (or a directory of pulse groups) as SVG.
    Plot {
        input: PathBuf,
        /// deviation, fringe, drift, spacing or overlay; inferred when omitted.
        #[arg(long)]
        style: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(written) => {
            for p in written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
