//! Configuration-driven runner around `urysohn-core`: builds the finite
//! input family, evaluates the image ensemble, and writes the funnel cloud,
//! a gap report and convergence sweeps.

pub mod config;
pub mod runner;
pub mod sweep;

pub use config::{KernelConfig, Mode, RunConfig};
pub use runner::{execute, run_experiment, write_artifacts, RunOutput, RunSummary, Timings};
pub use sweep::{halved_configs, sweep, SweepRow, SweepTable};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] urysohn_core::Error),
    #[error("{0}")]
    Capacity(String),
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("thread count must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
