mod args;
mod commands;
mod error;
mod svg;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, Scenario};
use error::{CliError, CliResult};

fn run(cli: &Cli) -> CliResult<()> {
    let sc = Scenario::from_args(cli.command.args())?;
    if sc.svg.is_some() && !matches!(cli.command, Command::Compare(_)) {
        return Err(CliError::Usage("--svg is only supported by compare".into()));
    }
    match &cli.command {
        Command::SecondHop(_) => commands::second_hop(&sc),
        Command::E2e(_) => commands::e2e(&sc),
        Command::Af(_) => commands::af(&sc),
        Command::SingleLayer(_) => commands::single_layer(&sc),
        Command::Compare(_) => commands::compare(&sc),
        Command::FitReport(_) => commands::fit_report(&sc),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let detail = first.trim_start_matches("error:").trim();
            eprintln!("{}", CliError::Usage(detail.to_string()).render());
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.render());
            ExitCode::FAILURE
        }
    }
}
