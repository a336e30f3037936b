use std::process::ExitCode;

use clap::Parser;
use rmdp_bench::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
