#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::CliError;
use crate::config::{parse_overrides, RunConfig};

/// Fast escaping set toolkit for genus-zero entire functions.
#[derive(Parser)]
#[command(name = "fastescape", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold scan, inequality checks and the iterated-modulus chain.
    Verify(CommonArgs),
    /// Pack T(r), trace islands and measure the nested levels.
    Construct(CommonArgs),
    /// Classify a rectangle of starting points into PGM rasters.
    Render(CommonArgs),
    /// McMullen bound, diameter model or box counting.
    Dimension(CommonArgs),
    /// Canonical configuration and derived constants.
    Info(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Configuration file (`[section]` blocks of `key = value`).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory; same as `--run.output`.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (0 = all cores); same as `--run.workers`.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides of the form `--section.key value`.
    #[arg(
        trailing_var_arg = true,
        allow_hyphen_values = true,
        value_name = "--section.key VALUE"
    )]
    overrides: Vec<String>,
}

fn load(args: &CommonArgs, check: bool) -> Result<RunConfig, CliError> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut ov = parse_overrides(&args.overrides).map_err(|e| CliError::Config(e.0))?;
    if let Some(o) = &args.output {
        ov.push((
            "run.output".into(),
            format!("{:?}", o.display().to_string()),
        ));
    }
    if let Some(w) = args.workers {
        ov.push(("run.workers".into(), w.to_string()));
    }
    let result = if check {
        RunConfig::load(&text, &ov)
    } else {
        RunConfig::load_unchecked(&text, &ov)
    };
    result.map_err(|e| CliError::Config(e.0))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, check) = match &cli.command {
        Command::Info(a) => (a, false),
        Command::Verify(a) | Command::Construct(a) | Command::Render(a) | Command::Dimension(a) => {
            (a, true)
        }
    };
    let cfg = load(args, check)?;
    if cfg.run.workers > 0 {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.run.workers)
            .build_global();
    }
    match cli.command {
        Command::Verify(_) => commands::verify(&cfg),
        Command::Construct(_) => commands::construct(&cfg),
        Command::Render(_) => commands::render(&cfg),
        Command::Dimension(_) => commands::dimension(&cfg),
        Command::Info(_) => commands::info(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fastescape: {e}");
            ExitCode::from(e.code())
        }
    }
}
