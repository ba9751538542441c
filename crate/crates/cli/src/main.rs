use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

mod commands;
mod config;
mod output;

use config::{Command, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "dnlw", version, about = "Traveling waves and simulations for u_t = Δ_p(u^m) + f(u)")]
struct Cli {
    /// Output directory; falls back to $DNLW_OUT, then ./dnlw_out
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Problems with the request itself, reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn resolve(cli: Cli) -> anyhow::Result<RunConfig> {
    if let Command::Replay { config } = &cli.command {
        let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
        let mut saved: RunConfig = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("invalid config {}: {e}", config.display())))?;
        if let Some(out) = cli.out {
            saved.out = out;
        }
        return Ok(saved);
    }
    let out = cli
        .out
        .or_else(|| std::env::var_os("DNLW_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("dnlw_out"));
    Ok(RunConfig { version: dnlw::VERSION.to_string(), out, command: cli.command })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<dnlw::Error>() {
        Some(
            dnlw::Error::Domain(_)
            | dnlw::Error::Bracket { .. }
            | dnlw::Error::SpeedTooLow { .. }
            | dnlw::Error::DeltaTooSmall { .. }
            | dnlw::Error::GridTooSmall(_)
            | dnlw::Error::Anchor { .. },
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match resolve(cli).and_then(|cfg| commands::run(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
