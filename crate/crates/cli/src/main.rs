mod args;
mod cointegration;
mod compare;
mod data;
mod fit;
mod forecast;
mod output;
mod synth;
mod unitroot;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Invalid invocation or inputs that do not match the manifest. Exits with 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Parser)]
#[command(
    name = "lfpc",
    version,
    about = "Inflation, unemployment and labour-force change: cumulative fits, tests and projections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Fit(fit::Opts),
    Unitroot(unitroot::Opts),
    Cointegration(cointegration::Opts),
    Forecast(forecast::Opts),
    CompareSources(compare::Opts),
    Synth(synth::Opts),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(o) => fit::run(o),
        Command::Unitroot(o) => unitroot::run(o),
        Command::Cointegration(o) => cointegration::run(o),
        Command::Forecast(o) => forecast::run(o),
        Command::CompareSources(o) => compare::run(o),
        Command::Synth(o) => synth::run(o),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
