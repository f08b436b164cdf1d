use nhqmc_core::estimator::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{config, Result};

/// Runs estimator tasks on a dedicated rayon pool.
pub struct Pool {
    pool: ThreadPool,
}

impl Pool {
    /// `workers = 0` uses one thread per available core.
    pub fn new(workers: usize) -> Result<Self> {
        match ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => Ok(Self { pool }),
            Err(e) => config(format!("cannot start {workers} workers: {e}")),
        }
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn run<T, F>(&self, n_tasks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n_tasks).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_keep_task_order() {
        let pool = Pool::new(3).unwrap();
        assert_eq!(pool.workers(), 3);
        let out = pool.run(100, |i| i * i);
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }
}
