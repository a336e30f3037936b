//! Command-line front end for the robust MDP solvers: instance generation,
//! solver runs with CSV traces, duality-gap certification and Garnet sweeps.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use cli::Cli;
pub use error::{exit, CliError};

/// Dispatches a parsed command line and maps failures to exit codes.
pub fn run(cli: Cli) -> u8 {
    let result = match &cli.command {
        cli::Command::Gen(args) => commands::cmd_gen(args),
        cli::Command::Solve(args) => commands::cmd_solve(args),
        cli::Command::Gap(args) => commands::cmd_gap(args),
        cli::Command::Bench(args) => commands::cmd_bench(args),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })
}
