use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use qrepgame::cli::{cmd_bimatrix, cmd_compare_protocols, cmd_dominance, cmd_nash, cmd_scan, cmd_spe, cmd_tree, OutputFormat};
use qrepgame::config::{GameConfig, GameSetup, PayoffSpec, Protocol};
use qrepgame::equilibria::DEFAULT_TOL;
use qrepgame::repro::{cmd_paper_repro, ReproOptions};
use qrepgame::stagegames::qubit_count;
use qrepgame::Error;

#[derive(Parser)]
#[command(name = "qrepgame", version, about = "Twice-repeated 2x2 games played through shared quantum states")]
struct Cli {
    /// Game configuration (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the protocol named in the config
    #[arg(long, global = true, value_enum)]
    protocol: Option<Protocol>,
    /// Write output here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Absolute tolerance on payoff comparisons
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 20)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 0.01)]
    grid_step: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pure-strategy payoff table
    Bimatrix,
    /// Pure Nash equilibria of the full table
    Nash,
    /// Subgame-perfect equilibria (pair-product states only)
    Spe,
    /// Strictly dominated strategies
    Dominance,
    /// Batch against sequential play on random states
    Compare,
    /// Cooperation threshold scan over |λ0|²
    Scan,
    /// Extensive form as JSON
    Tree,
    /// Qubits needed for n stages
    Qubits { stages: u32 },
    /// Run every reproduction check
    Repro {
        #[arg(long, hide = true)]
        perturb: bool,
    },
}

enum Failure {
    Check(String),
    Usage(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

fn load(cli: &Cli) -> Result<GameSetup, Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs --config".into()))?;
    let mut cfg = GameConfig::from_path(path)?;
    if let Some(p) = cli.protocol {
        cfg.protocol = p;
    }
    cfg.build()
}

/// Stage game for commands that only need payoffs; PD(5,3,1,0) without a config.
fn load_stage(cli: &Cli) -> Result<qrepgame::stagegames::StageGame, Error> {
    match &cli.config {
        Some(path) => GameConfig::from_path(path)?.payoffs.build(),
        None => PayoffSpec::pd(5.0, 3.0, 1.0, 0.0).build(),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let text = match &cli.command {
        Command::Bimatrix => cmd_bimatrix(&load(cli)?, cli.format)?,
        Command::Nash => json(&cmd_nash(&load(cli)?, cli.tol)?)?,
        Command::Spe => json(&cmd_spe(&load(cli)?, cli.tol)?)?,
        Command::Dominance => json(&cmd_dominance(&load(cli)?, cli.tol)?)?,
        Command::Compare => {
            let protocol = match (cli.protocol, &cli.config) {
                (Some(p), _) => p,
                (None, Some(path)) => GameConfig::from_path(path)?.protocol,
                (None, None) => Protocol::Mw10,
            };
            let report = cmd_compare_protocols(protocol, &load_stage(cli)?, cli.samples, cli.seed)?;
            let text = json(&report)?;
            if !report.passed {
                emit(cli, &text)?;
                return Err(Failure::Check(format!("max deviation {:e} exceeds {:e}", report.max_deviation, report.tolerance)));
            }
            text
        }
        Command::Scan => {
            let analysis = cmd_scan(&load_stage(cli)?, cli.grid_step)?;
            let text = match cli.format {
                OutputFormat::Csv => analysis.to_csv_string()?,
                OutputFormat::Json => json(&analysis)?,
            };
            if !analysis.holds() {
                emit(cli, &text)?;
                return Err(Failure::Check("scan disagrees with the closed-form bound".into()));
            }
            text
        }
        Command::Tree => json(&cmd_tree(&load(cli)?)?)?,
        Command::Qubits { stages } => format!("{}\n", qubit_count(*stages)?),
        Command::Repro { perturb } => {
            let report = cmd_paper_repro(&ReproOptions { perturb: *perturb });
            let text = report.to_string();
            if !report.passed() {
                emit(cli, &text)?;
                return Err(Failure::Check("reproduction checks failed".into()));
            }
            text
        }
    };
    Ok(text)
}

fn emit(cli: &Cli, text: &str) -> Result<(), Error> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|text| emit(&cli, &text).map_err(Failure::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
