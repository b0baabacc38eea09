//! Chunked map-reduce over index ranges, on rayon when the `parallel`
//! feature is enabled and on the calling thread otherwise.
//!
//! Work is split into fixed-size chunks that do not depend on the worker
//! count, and every caller derives its randomness from the item index, so
//! results are identical for any `Execution`.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Run on a pool of this many threads. Falls back to sequential when the
    /// crate is built without the `parallel` feature.
    Parallel(usize),
}

impl Execution {
    pub fn from_workers(workers: usize) -> Self {
        if workers <= 1 {
            Execution::Sequential
        } else {
            Execution::Parallel(workers)
        }
    }
}

/// Default worker count: the available parallelism of this machine.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn chunks(total: u64, chunk: u64) -> impl Iterator<Item = Range<u64>> + Clone {
    let chunk = chunk.max(1);
    (0..total.div_ceil(chunk)).map(move |c| c * chunk..((c + 1) * chunk).min(total))
}

pub(crate) fn map_reduce<T, M, R>(total: u64, chunk: u64, exec: Execution, map: M, reduce: R) -> Option<T>
where
    T: Send,
    M: Fn(Range<u64>) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => chunks(total, chunk).map(&map).reduce(&reduce),
        #[cfg(feature = "parallel")]
        Execution::Parallel(workers) => {
            use rayon::prelude::*;
            let ranges: Vec<Range<u64>> = chunks(total, chunk).collect();
            let run = || ranges.into_par_iter().map(&map).reduce_with(&reduce);
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => pool.install(run),
                Err(_) => run(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel(_) => chunks(total, chunk).map(&map).reduce(&reduce),
    }
}
