//! Driver for branch tracing, blow-up analysis and identity verification runs.

pub mod analyze;
pub mod config;
pub mod trace;
pub mod verify;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

pub use config::RunConfig;

/// Failure classes, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("check failed: {0}")]
    Science(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Science(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub(crate) fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}
