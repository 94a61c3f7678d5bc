//! `backscatter`: potential generation, kernel tables, Born terms, wave runs and
//! the estimate checks, driven by a JSON config.
//!
//! Exit codes: 0 when every check passes, 2 on invalid input or numerical failure,
//! 3 when a check fails.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use backscatter_core::Error as CoreError;
use clap::{Parser, Subcommand};

use commands::{Ctx, Outcome};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "backscatter", version, about = "Backscattering transform terms and estimate checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Kernel table to write (kernels) or read (b2).
    #[arg(long, global = true)]
    table: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sample a potential on the grid.
    Potential,
    /// Tabulate the radial kernel profile.
    Kernels,
    /// Second Born term by the Fourier lattice path.
    B2,
    /// Higher Born terms of a radial Gaussian by Monte Carlo.
    Radial,
    /// Wave solve against the Born series.
    Wave,
    /// Estimate checks.
    Bounds,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Potential => "potential",
            Command::Kernels => "kernels",
            Command::B2 => "b2",
            Command::Radial => "radial",
            Command::Wave => "wave",
            Command::Bounds => "bounds",
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let ctx = Ctx {
        out: commands::out_dir(&cfg, cli.out.as_deref(), cli.command.name()),
        table: cli.table.clone().or_else(|| cfg.table.clone()),
        cache: std::env::var_os("BACKSCATTER_CACHE").map(PathBuf::from),
    };
    std::fs::create_dir_all(&ctx.out)?;
    match cli.command {
        Command::Potential => commands::cmd_potential(&cfg, &ctx),
        Command::Kernels => commands::cmd_kernels(&cfg, &ctx),
        Command::B2 => commands::cmd_b2(&cfg, &ctx),
        Command::Radial => commands::cmd_radial(&cfg, &ctx),
        Command::Wave => commands::cmd_wave(&cfg, &ctx),
        Command::Bounds => commands::cmd_bounds(&cfg, &ctx),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::BoundViolated { .. }) | Some(CoreError::CounterexampleFound(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = std::time::Instant::now();
    match run(&cli) {
        Ok(o) => {
            eprintln!("{}: {} ({:.1} s)", cli.command.name(), o.summary, start.elapsed().as_secs_f64());
            if o.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}: check failed", cli.command.name());
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("{}: error: {e:#}", cli.command.name());
            ExitCode::from(exit_code(&e))
        }
    }
}
