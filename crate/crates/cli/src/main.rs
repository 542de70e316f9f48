use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kgres_cli::{
    analyze_command, decay_command, evolve_command, parse_config, verify_command, CliError, CommandOutput, RunConfig,
};

#[derive(Parser)]
#[command(name = "kgres", version, about = "Resonance analysis and profile evolution for Klein-Gordon systems")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Speed/mass conditions, resonance sets, factorizations and sublevel measures.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pseudo-spectral evolution of the profile equation.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linear decay experiment: a named preset or `grid`.
    Decay {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        preset: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs every invariant check and prints the report.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn out_dir(cfg: &RunConfig, out: Option<PathBuf>) -> Result<PathBuf, CliError> {
    out.or_else(|| cfg.output_dir.clone()).ok_or_else(|| CliError::Config {
        path: "output_dir".into(),
        message: "no --out given and the configuration sets no output_dir".into(),
    })
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    parse_config(path)
}

fn run(cli: Cli) -> Result<(CommandOutput, bool), CliError> {
    match cli.command {
        Cmd::Analyze { config, out } => {
            let cfg = load(&config)?;
            Ok((analyze_command(&cfg, &out_dir(&cfg, out)?)?, false))
        }
        Cmd::Evolve { config, out } => {
            let cfg = load(&config)?;
            Ok((evolve_command(&cfg, &out_dir(&cfg, out)?)?, false))
        }
        Cmd::Decay { config, preset, out } => {
            let cfg = load(&config)?;
            Ok((decay_command(&cfg, &preset, &out_dir(&cfg, out)?)?, false))
        }
        Cmd::Verify { config } => Ok((verify_command(&load(&config)?)?, true)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((output, print)) => {
            if print {
                print!("{}", output.report.to_json());
            }
            ExitCode::from(output.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
