//! Commands behind the `rayclass` binary.

pub mod commands;
pub mod config;

use std::fmt;

pub use commands::{cmd_generate, cmd_masks, cmd_report, cmd_run, cmd_verify, RunSummary};
pub use config::PipelineConfig;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "RAYCLASS_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config, or inputs the pipeline cannot use.
    Usage(String),
    /// A verified property failed.
    Property(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Property(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Property(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rayclass_core::Error> for CliError {
    fn from(e: rayclass_core::Error) -> Self {
        match e {
            rayclass_core::Error::Io { .. } | rayclass_core::Error::Format { .. } => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Worker pool sized by `RAYCLASS_THREADS`, or rayon's default when unset.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}={value:?} is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}
