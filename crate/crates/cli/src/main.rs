use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dads_cli::commands;
use dads_cli::config::{self, Job};

#[derive(Parser)]
#[command(name = "dads", version, about = "Adaptive regulation runs with theorem checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a scenario and write trajectory.csv, report.json and plots.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fixed time step; must not exceed the stability limit.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Print the minimum gains and the chosen gain profile.
    Gains {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare linear feedback above the small-gain threshold with DADS.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Parse and check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<Job, u8> {
    config::load(path).map_err(|e| commands::config_error(path, &e, &mut io::stderr()) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, err) = (&mut io::stdout(), &mut io::stderr());
    let code = match cli.cmd {
        Cmd::Run {
            config,
            out: dir,
            dt,
            horizon,
        } => match load(&config) {
            Err(c) => return ExitCode::from(c),
            Ok(mut job) => {
                let over = dt
                    .map_or(Ok(()), |dt| job.set_dt(Some(dt)))
                    .and_then(|_| horizon.map_or(Ok(()), |t| job.set_horizon(t)));
                match over {
                    Err(e) => commands::config_error(&config, &e, err),
                    Ok(()) => commands::run(&job, &dir, out, err),
                }
            }
        },
        Cmd::Gains { config } => match load(&config) {
            Err(c) => return ExitCode::from(c),
            Ok(job) => commands::gains(&job, out, err),
        },
        Cmd::Compare { config } => match load(&config) {
            Err(c) => return ExitCode::from(c),
            Ok(job) => commands::compare(&job, out, err),
        },
        Cmd::Validate { config } => match load(&config) {
            Err(c) => return ExitCode::from(c),
            Ok(job) => commands::validate(&job, out),
        },
    };
    ExitCode::from(code as u8)
}
