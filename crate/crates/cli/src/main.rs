mod cmd;
mod config;
mod manifest;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use crate::config::{Format, ModeName, RunConfig};

/// Exact LP tools for no-signalling randomness certification.
#[derive(Parser, Debug)]
#[command(name = "nsrand", version, about)]
struct Cli {
    /// TOML run config. Defaults to ./nsrand.toml when it exists.
    #[arg(long, global = true, env = "NSRAND_CONFIG")]
    config: Option<PathBuf>,
    /// Overrides `mode` from the config.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeName>,
    /// Overrides `output_format` from the config.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// No-signalling value of a game, with an exact certificate file.
    NsValue(cmd::ns_value::Args),
    /// Multi-round guessing probability against a fixed product marginal.
    Tons(cmd::tons::Args),
    /// Build and verify the Kochen-Specker attack behavior.
    KsAttack(cmd::ks_attack::Args),
    /// Guessing probability and min-entropy curves of the chain game.
    Curves(cmd::curves::Args),
    /// Abort and guessing bounds over a range of round counts.
    Bounds(cmd::bounds::Args),
}

/// An error carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const VERIFICATION: u8 = 1;
    pub const INFEASIBLE: u8 = 2;
    pub const INPUT: u8 = 3;

    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: Self::INPUT, message: message.into() }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Failure { code: Self::VERIFICATION, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use nsrand_core::Error as E;
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Infeasible(_) => Failure::INFEASIBLE,
                E::Verification(_) | E::Solver(_) => Failure::VERIFICATION,
                _ => Failure::INPUT,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<serde_json::Error>() {
            return Failure::INPUT;
        }
    }
    Failure::VERIFICATION
}

fn run(cli: Cli) -> Result<()> {
    let (mut cfg, _) = RunConfig::load(cli.config.as_deref())?;
    if let Some(m) = cli.mode {
        cfg.mode = m;
    }
    if let Some(f) = cli.format {
        cfg.output_format = f;
    }
    match &cli.command {
        Command::NsValue(a) => cmd::ns_value::run(&cfg, a),
        Command::Tons(a) => cmd::tons::run(&cfg, a),
        Command::KsAttack(a) => cmd::ks_attack::run(&cfg, a),
        Command::Curves(a) => cmd::curves::run(&cfg, a),
        Command::Bounds(a) => cmd::bounds::run(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Failure::INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
