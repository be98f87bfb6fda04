//! Worker-pool sizing. `EXPOSURE_GAMES_WORKERS` is the only environment
//! variable the tool reads; run cells are internally deterministic, so the
//! pool size never changes any output byte.

use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{CliError, Result};

pub const WORKERS_ENV: &str = "EXPOSURE_GAMES_WORKERS";

pub fn pool() -> Result<ThreadPool> {
    let mut builder = ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(WORKERS_ENV) {
        let count: usize = value.parse().map_err(|_| {
            CliError::Invalid(format!("{WORKERS_ENV}={value:?} is not a thread count"))
        })?;
        builder = builder.num_threads(count.max(1));
    }
    builder
        .build()
        .map_err(|e| CliError::Invalid(format!("failed to build worker pool: {e}")))
}
