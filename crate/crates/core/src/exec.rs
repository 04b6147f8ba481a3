//! Ordered data-parallel execution with a sequential fallback.
//!
//! Work is split into chunks whose results are collected in input order and
//! then folded left to right, so results never depend on the worker count.

use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Rayon pool with this many threads; sequential when built without the `parallel` feature.
    Parallel { jobs: usize },
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel { jobs: 0 }
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// `jobs = 1` is sequential, `jobs = 0` lets rayon choose.
    pub fn from_jobs(jobs: usize) -> Self {
        if jobs == 1 {
            Exec::Sequential
        } else {
            Exec::Parallel { jobs }
        }
    }

    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && matches!(self, Exec::Parallel { .. })
    }

    /// `f` applied to every item, results in input order.
    pub fn map<T, U, F>(&self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel { jobs } => {
                use rayon::prelude::*;
                self.install(*jobs, || items.par_iter().map(&f).collect())
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Splits `range` into consecutive chunks of `chunk` elements, maps each
    /// chunk, and folds the results left to right.
    pub fn map_reduce<A, M, R>(&self, range: Range<u64>, chunk: u64, map: M, init: A, reduce: R) -> A
    where
        A: Send,
        M: Fn(Range<u64>) -> A + Sync + Send,
        R: Fn(A, A) -> A,
    {
        let chunk = chunk.max(1);
        let chunks: Vec<Range<u64>> = (0..range.end.saturating_sub(range.start).div_ceil(chunk))
            .map(|i| {
                let s = range.start + i * chunk;
                s..(s + chunk).min(range.end)
            })
            .collect();
        self.map(&chunks, |r| map(r.clone())).into_iter().fold(init, reduce)
    }

    #[cfg(feature = "parallel")]
    fn install<U: Send>(&self, jobs: usize, op: impl FnOnce() -> U + Send) -> U {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(op),
            Err(_) => op(),
        }
    }
}
