//! `mjpaug`: simulate, infer, cluster and compare Markov jump process
//! samplers from a TOML configuration.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{Classify, Ctx, Failure};

#[derive(Parser)]
#[command(
    name = "mjpaug",
    version,
    about = "Auxiliary-variable uniformization samplers for Markov jump processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// `key=value` patch applied to the configuration; dotted keys reach
    /// into tables. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate processes and write paths and observations.
    Simulate(Common),
    /// Run the Gibbs sampler and write traces and diagnostics.
    Infer(Common),
    /// Cluster processes with gibbs, kmeans or pam.
    Cluster(Common),
    /// ESS and timing over a grid of p values and omega scales.
    Compare(Common),
}

fn run(cli: Cli) -> Result<(), Failure> {
    let started = Instant::now();
    let (name, common) = match &cli.command {
        Command::Simulate(c) => ("simulate", c),
        Command::Infer(c) => ("infer", c),
        Command::Cluster(c) => ("cluster", c),
        Command::Compare(c) => ("compare", c),
    };
    let loaded = config::load(&common.config, &common.overrides, common.seed).config()?;
    let setup = loaded.config.setup().config()?;
    let gibbs = match &cli.command {
        Command::Simulate(_) => false,
        Command::Cluster(_) => loaded.config.method == "gibbs",
        _ => true,
    };
    if gibbs {
        loaded.config.check_gibbs_start(&setup).config()?;
    }
    std::fs::create_dir_all(&common.out).runtime()?;
    let ctx = Ctx {
        command: name,
        config: &loaded.config,
        canonical: &loaded.canonical,
        out: &common.out,
        started,
    };
    match cli.command {
        Command::Simulate(_) => commands::simulate(&ctx, &setup),
        Command::Infer(_) => commands::infer(&ctx, &setup),
        Command::Cluster(_) => commands::cluster(&ctx, &setup),
        Command::Compare(_) => commands::compare(&ctx, &setup),
    }
    .runtime()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
