mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::FigureGrid;
use crate::config::{ModelArgs, OracleArgs, RunConfig};
use crate::error::CliError;
use crate::output::Table;

/// Envelope-theory approximations and bounds for H = T(p) + V(r).
#[derive(Debug, Parser)]
#[command(name = "kinbound", version)]
struct Cli {
    /// TOML run configuration; flags override its keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    oracle: OracleArgs,
    /// Also write the table as CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Envelope energies for each state
    Solve(Common),
    /// Convexity of h and g and the resulting bound class
    Classify(Common),
    /// Envelope energies against the numerical spectrum
    Oracle(Common),
    /// Toy-model curves as a function of k
    #[command(name = "toy-figure2")]
    ToyFigure2 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k_min: Option<f64>,
        #[arg(long)]
        k_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Semiclassical circular orbits
    Orbit {
        #[command(flatten)]
        common: Common,
        /// Second kinetic energy for a two-body orbit (catalog spec)
        #[arg(long)]
        kinetic2: Option<String>,
        /// Orbital quantum numbers, comma separated
        #[arg(long, default_value = "0")]
        l: String,
    },
    /// Invariant suite with measured residuals
    Check(Common),
}

fn load(path: Option<&PathBuf>, common: &Common) -> Result<RunConfig, CliError> {
    RunConfig::load(path.map(|p| p.as_path()), &common.model, &common.oracle, common.out.clone())
}

fn emit(table: &Table, cfg: &RunConfig) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    table.write_aligned(&mut stdout)?;
    stdout.flush()?;
    if let Some(path) = &cfg.out {
        table.write_csv(path)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli.config.as_ref();
    match cli.command {
        Command::Solve(c) => {
            let cfg = load(path, &c)?;
            emit(&commands::solve(&cfg)?, &cfg)
        }
        Command::Classify(c) => {
            let cfg = load(path, &c)?;
            emit(&commands::classify(&cfg)?, &cfg)
        }
        Command::Oracle(c) => {
            let cfg = load(path, &c)?;
            emit(&commands::oracle(&cfg)?, &cfg)
        }
        Command::ToyFigure2 { common, k_min, k_max, points } => {
            let cfg = load(path, &common)?;
            let grid = FigureGrid {
                k_min: k_min.unwrap_or(cfg.k_min),
                k_max: k_max.unwrap_or(cfg.k_max),
                points: points.unwrap_or(cfg.points),
            };
            emit(&commands::toy_figure2(&cfg, grid)?, &cfg)
        }
        Command::Orbit { common, kinetic2, l } => {
            let mut cfg = load(path, &common)?;
            if let Some(spec) = kinetic2 {
                cfg.kinetic2 = Some(config::Source::Catalog(spec));
            }
            let ls = l
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<u32>()
                        .map_err(|_| CliError::config(format!("'{x}' is not an orbital quantum number")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            emit(&commands::orbit(&cfg, &ls)?, &cfg)
        }
        Command::Check(c) => {
            let cfg = load(path, &c)?;
            let (table, failures) = commands::check(&cfg)?;
            emit(&table, &cfg)?;
            if failures > 0 {
                return Err(CliError::CheckFailed(failures));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kinbound: {e}");
            e.exit_code()
        }
    }
}
