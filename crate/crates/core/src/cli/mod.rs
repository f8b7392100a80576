//! Command-line front end. [`run`] parses arguments and returns the captured
//! output and exit code, so the binary is a thin wrapper.

mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::models::{BathState, ControlKind, CouplingMode};
pub use commands::{format_sig, schedule_csv, simulate_csv, sweep_csv, verify_csv};
use config::{InitialState, ModelKind, PulseKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_THRESHOLD: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "udd", version, about = "Uhrig dynamical decoupling simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print pulse times as `j,t_j`.
    Schedule(ScheduleArgs),
    /// Fit the UDD product-identity exponent for random Hermitian pairs.
    Verify(VerifyArgs),
    /// Run one experiment and print `t,F`.
    Simulate(SimulateArgs),
    /// Run one experiment per value of a parameter.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScheduleKind {
    Udd,
    Periodic,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "t", visible_alias = "total-time")]
    pub total_time: f64,
    #[arg(long, value_enum, default_value = "udd")]
    pub kind: ScheduleKind,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long)]
    pub n: usize,
    /// Number of seeds, starting at `--first-seed`.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    #[arg(long, default_value_t = 0.0125)]
    pub t_min: f64,
    #[arg(long, default_value_t = 0.2)]
    pub t_max: f64,
    #[arg(long, default_value_t = 5)]
    pub points: usize,
    /// Use commuting pairs, for which the identity holds exactly.
    #[arg(long)]
    pub commuting_smoke: bool,
    #[arg(long)]
    pub sequential: bool,
}

/// Experiment flags; any flag left unset falls back to `--config`, then to
/// `UDD_SEED` (seed only), then to the defaults.
#[derive(Debug, Default, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub control: Option<ControlKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "t", visible_alias = "total-time")]
    pub total_time: Option<f64>,
    #[arg(long)]
    pub pulse: Option<PulseKind>,
    #[arg(long)]
    pub c_ratio: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// up_up | bell_plus | singlet | level0 | re[:im],re[:im],...
    #[arg(long, allow_hyphen_values = true)]
    pub initial: Option<InitialState>,
    #[arg(long)]
    pub coupling: Option<CouplingMode>,
    /// first | mixed
    #[arg(long)]
    pub bath_state: Option<BathState>,
    /// Write the model's coefficient log CSV to this path.
    #[arg(long)]
    pub log_coefficients: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Add a `D_integrand` column.
    #[arg(long)]
    pub distance: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    N,
    #[value(name = "c_ratio")]
    CRatio,
    #[value(name = "total_time")]
    TotalTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepMetric {
    #[value(name = "d_bar")]
    DBar,
    #[value(name = "final_f")]
    FinalF,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// Comma-separated values; integer ranges `a..b` are inclusive.
    #[arg(long, allow_hyphen_values = true)]
    pub values: String,
    #[arg(long, value_enum, default_value = "d_bar")]
    pub metric: SweepMetric,
    #[arg(long)]
    pub sequential: bool,
}

/// Captured result of one invocation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            ..Default::default()
        }
    }

    fn usage(msg: impl std::fmt::Display) -> Self {
        Outcome {
            stderr: format!("error: {msg}\n"),
            code: EXIT_USAGE,
            ..Default::default()
        }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            return if e.use_stderr() {
                Outcome {
                    stderr: text,
                    code,
                    ..Default::default()
                }
            } else {
                Outcome {
                    stdout: text,
                    code,
                    ..Default::default()
                }
            };
        }
    };
    match cli.command {
        Command::Schedule(a) => commands::schedule(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Sweep(a) => commands::sweep(&a),
    }
}
