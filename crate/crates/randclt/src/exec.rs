//! A rayon-backed executor. Work items are indexed, so results do not
//! depend on the number of threads.

use randclt_core::rng::Executor;
use rayon::prelude::*;

use crate::error::{config, Result};

/// Environment variable supplying the default thread count.
pub const THREADS_ENV: &str = "RANDCLT_THREADS";

pub struct Parallel {
    pool: rayon::ThreadPool,
}

impl Parallel {
    /// A pool with `threads` workers; `None` reads [`THREADS_ENV`] and falls
    /// back to the number of available cores.
    pub fn new(threads: Option<usize>) -> Result<Self> {
        let threads = match threads {
            Some(t) => t,
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => match v.trim().parse::<usize>() {
                    Ok(t) => t,
                    Err(_) => return config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
                },
                Err(_) => 0,
            },
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::error::HarnessError::Config(format!("cannot start thread pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Parallel {
    fn map<T: Send, F: Fn(usize) -> T + Sync + Send>(&self, count: usize, f: F) -> Vec<T> {
        self.pool.install(|| (0..count).into_par_iter().map(f).collect())
    }
}
