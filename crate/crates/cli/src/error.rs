use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Core(#[from] optoweak_core::Error),

    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use optoweak_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Validation(_) => EXIT_VALIDATION,
            // The configuration asked for something the physics layer refuses.
            CliError::Core(
                E::InvalidParams(_)
                | E::TruncationGuard { .. }
                | E::GridGuard(_)
                | E::BadGrid
                | E::ZeroDelta(_)
                | E::ExpansionGuard(_)
                | E::ResonancePole { .. }
                | E::DegenerateProbability,
            ) => EXIT_CONFIG,
            CliError::Core(_) => EXIT_VALIDATION,
        }
    }
}
