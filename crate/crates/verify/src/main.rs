use std::process::ExitCode;

use clap::Parser;
use synthgeom_verify::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(&Cli::parse()))
}
