use clap::Parser;
use std::process::ExitCode;
use terapix_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match terapix_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
