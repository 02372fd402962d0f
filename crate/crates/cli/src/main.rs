use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = augclust_cli::Cli::parse();
    match augclust_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("augclust: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
