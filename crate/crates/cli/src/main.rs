use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use oda_cli::cli::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage errors are config errors (1); 2 is reserved for missing data.
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    env_logger::Builder::new().parse_filters(&cli.log).parse_default_env().init();
    match oda_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oda: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
