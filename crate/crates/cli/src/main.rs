//! Command-line front end: solve, verify, sweep, reconstruct, export.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ssprofile::Equation;

use commands::{Check, Overrides};

#[derive(Parser)]
#[command(name = "ssprofile", version, about = "Self-similar profiles of dispersive equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// JSON solve configuration; flags override its scalar fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_equation)]
    equation: Option<Equation>,
    /// Driving value: `c` for mkdv, kdv4 and mbo, `A` for nls.
    #[arg(long, visible_alias = "c", allow_negative_numbers = true)]
    amplitude: Option<f64>,
    /// Imaginary part of the driving value.
    #[arg(long, allow_negative_numbers = true)]
    amplitude_im: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Largest grid frequency.
    #[arg(long)]
    far_cut: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    picard_tol: Option<f64>,
}

impl ConfigArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            equation: self.equation,
            amplitude: self.amplitude,
            amplitude_im: self.amplitude_im,
            kappa: self.kappa,
            far_cut: self.far_cut,
            max_iters: self.max_iters,
            picard_tol: self.picard_tol,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Construct a profile and write its artifacts.
    Solve {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run numerical checks, optionally on a solved profile.
    Verify {
        /// Directory holding profile.csv and profile.json.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "decay,residual")]
        checks: Vec<Check>,
        #[arg(long, default_value_t = 1e-6)]
        residual_tol: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Solve over a list of driving values.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated driving values.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, num_args = 0..)]
        values: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sample the physical field of a solved profile.
    Reconstruct {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value_t = -50.0, allow_negative_numbers = true)]
        x_min: f64,
        #[arg(long, default_value_t = 50.0, allow_negative_numbers = true)]
        x_max: f64,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Also evolve the field over this time span and compare with the rescaling.
        #[arg(long)]
        evolve: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Tabulate the ansatz, remainder and transform on the profile grid.
    Export {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn parse_equation(s: &str) -> std::result::Result<Equation, String> {
    s.parse().map_err(|e: ssprofile::Error| e.to_string())
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SSPROFILE_THREADS") {
        let n: usize = v.parse().with_context(|| format!("SSPROFILE_THREADS = {v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    match cli.command {
        Command::Solve { config, out } => {
            let cfg = commands::load_config(config.config.as_deref(), &config.overrides())?;
            commands::solve(&cfg, &out)
        }
        Command::Verify { profile, checks, residual_tol, out } => {
            commands::verify(profile.as_deref(), &checks, residual_tol, &out)
        }
        Command::Sweep { config, values, out } => {
            let mut o = config.overrides();
            // the sweep supplies the driving value
            o.amplitude = None;
            o.amplitude_im = None;
            let cfg = commands::load_config(config.config.as_deref(), &o)?;
            commands::sweep(&cfg, &values, &out)
        }
        Command::Reconstruct { profile, x_min, x_max, points, t, evolve, out } => {
            commands::reconstruct(&profile, (x_min, x_max, points), t, evolve, &out)?;
            Ok(true)
        }
        Command::Export { profile, out } => {
            commands::export(&profile, &out)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(2)
        }
    }
}
