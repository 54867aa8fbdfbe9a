use rayon::prelude::*;
use wmfair_core::checker::Expander;

/// Expands exploration frontiers on a rayon pool. Results come back in
/// index order, so graphs do not depend on the number of workers.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    pub fn new(jobs: usize) -> Result<Pool, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        Ok(Pool { pool })
    }
}

impl Expander for Pool {
    fn map<T: Send, F: Fn(usize) -> T + Sync>(&self, n: usize, f: F) -> Vec<T> {
        // small frontiers are not worth the hand-off
        if n < 32 || self.pool.current_num_threads() == 1 {
            return (0..n).map(f).collect();
        }
        self.pool.install(|| (0..n).into_par_iter().map(&f).collect())
    }
}
