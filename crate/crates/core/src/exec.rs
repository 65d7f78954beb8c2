//! Run options and deterministic parallel reductions over index ranges.
//!
//! Work is split into fixed-size chunks independent of the thread count, and
//! partial results are merged with commutative, associative operations, so
//! the outcome does not depend on scheduling.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default cap on the number of polynomials a single call may enumerate.
pub const DEFAULT_BUDGET: u64 = 1 << 26;

const CHUNK: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanOptions {
    /// Worker threads; 0 uses the ambient rayon pool.
    pub workers: usize,
    pub budget: u64,
    /// Keep per-cell records in scan reports.
    pub per_cell: bool,
    /// Progression scans stop after this many cells, in canonical order.
    pub max_cells: Option<u64>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            workers: 0,
            budget: DEFAULT_BUDGET,
            per_cell: false,
            max_cells: None,
        }
    }
}

impl ScanOptions {
    pub fn with_workers(workers: usize) -> Self {
        ScanOptions {
            workers,
            ..Self::default()
        }
    }

    pub fn check_budget(&self, projected: u128) -> Result<()> {
        if projected > self.budget as u128 {
            Err(Error::BudgetExceeded {
                projected,
                budget: self.budget,
            })
        } else {
            Ok(())
        }
    }

    /// Runs `job` on a pool of `workers` threads.
    pub fn install<R: Send>(&self, job: impl FnOnce() -> R + Send) -> R {
        if self.workers == 0 {
            return job();
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .expect("thread pool")
            .install(job)
    }
}

/// `q^e` as `u128`, saturating.
pub fn power(q: u64, e: u32) -> u128 {
    (q as u128).checked_pow(e).unwrap_or(u128::MAX)
}

/// Folds every index in `[0, n)` into per-chunk accumulators and merges them.
pub(crate) fn fold_range<A, I, F, M>(n: u64, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, u64) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                fold(&mut acc, i);
            }
            acc
        })
        .reduce(&init, &merge)
}

/// `f(i)` for every `i` in `[0, n)`, in index order.
pub(crate) fn map_range<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}
