use std::process::ExitCode;

use clap::Parser;
use epaut_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env = std::env::vars().collect();
    ExitCode::from(run(&cli, &env) as u8)
}
