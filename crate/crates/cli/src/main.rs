mod cli;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use commands::Failure;

const EXIT_VALIDATION_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.print_schema {
        print!("{}", config::SCHEMA);
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: no command given (price, curves, simulate, validate, sweep); see --help");
        return ExitCode::from(EXIT_CONFIG);
    };
    let settings = match config::resolve(&cli.global) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = match &command {
        Command::Price => commands::price(&settings),
        Command::Curves(g) => commands::curves(&settings, g),
        Command::Simulate => commands::simulate(&settings),
        Command::Validate => commands::validate(&settings),
        Command::Sweep(s) => commands::sweep(&settings, s),
    };
    match result {
        Ok(rendered) => {
            eprint!("{}", rendered.summary);
            if let Err(e) = output::emit(&rendered.text, settings.config.output.path.as_deref()) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(EXIT_VALIDATION_FAILED);
            }
            if rendered.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VALIDATION_FAILED)
            }
        }
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VALIDATION_FAILED)
        }
    }
}
