//! Configuration, reproduction commands and artifact writers behind the
//! `optoweak` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Command};
pub use config::{RunConfig, Scenario};
pub use error::CliError;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "OPTOWEAK_THREADS";

/// Parse a thread cap; `None` when unset.
pub fn thread_cap(raw: Option<&str>) -> Result<Option<usize>, CliError> {
    match raw {
        None => Ok(None),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(vec![format!("{THREADS_ENV} must be a positive integer, got `{s}`")])),
        },
    }
}
