use std::process::ExitCode;

use clap::Parser;
use prosumer_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.experiment, &cli.run) {
        Ok(out) => {
            println!("{}", out.table.display());
            println!("{}", out.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
