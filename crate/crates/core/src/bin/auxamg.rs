use std::process::ExitCode;

use auxamg::cli::{format_table, run, RunConfig};
use auxamg::error::EXIT_NOT_CONVERGED;
use clap::Parser;

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let level = match config.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&config) {
        Ok(reports) => {
            print!("{}", format_table(&reports));
            if reports.iter().all(|r| r.converged) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NOT_CONVERGED as u8)
            }
        }
        Err(e) => {
            eprintln!("auxamg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
