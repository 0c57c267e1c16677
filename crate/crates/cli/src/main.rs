use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use superint_cli::commands::{self, CliError, Options};
use superint_cli::config::{Format, ModelConfig};

/// Superintegrable Hamiltonians on spaces of constant curvature.
#[derive(Parser, Debug)]
#[command(name = "superint", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the angular potential and, optionally, the radial one.
    Tabulate(Common),
    /// Integrate one orbit and report invariant drift, phase drift and closure.
    Trace(Common),
    /// Actions and periods along an L grid at fixed energy.
    Scan(Common),
    /// Run verification suites; exit 1 if any check fails.
    Verify(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated suites for `verify`.
    #[arg(long, value_delimiter = ',')]
    suite: Option<Vec<String>>,
    /// Number of grid points.
    #[arg(long)]
    grid: Option<usize>,
    /// Seed for randomized placements.
    #[arg(long)]
    seed: Option<u64>,
    /// Data format (overrides `output.format`).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (Command::Tabulate(c) | Command::Trace(c) | Command::Scan(c) | Command::Verify(c)) = &cli.command;
    let cfg = ModelConfig::load(&c.config)?;
    let mut opts = Options::from_config(&cfg);
    if let Some(out) = &c.out {
        opts.out = out.clone();
    }
    if let Some(f) = c.format {
        opts.format = f;
    }
    opts.grid = c.grid;
    opts.seed = c.seed;
    opts.suites = c.suite.clone();
    let mut stdout = std::io::stdout();
    let written = match cli.command {
        Command::Tabulate(_) => commands::tabulate(&cfg, &opts, &mut stdout)?,
        Command::Trace(_) => commands::trace(&cfg, &opts, &mut stdout)?.0,
        Command::Scan(_) => commands::scan(&cfg, &opts, &mut stdout)?,
        Command::Verify(_) => commands::verify(&cfg, &opts, &mut stdout)?,
    };
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
