//! Command-line driver: verification campaigns, solves, constant-solution
//! tables and experiments, with JSON and CSV reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod spec;

pub use commands::{execute, RunResult, Status};
pub use config::{Cli, Invocation, RunConfig};
pub use error::CliError;

/// Runs `inv` on a pool of the requested size, or on the global pool.
pub fn run(inv: &Invocation) -> Result<RunResult, CliError> {
    match inv.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {t} threads: {e}")))?
            .install(|| execute(&inv.config)),
        None => execute(&inv.config),
    }
}
