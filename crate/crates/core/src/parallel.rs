//! Optional fan-out for independent evaluations.
//!
//! `DIGIT_DIRICHLET_THREADS` caps the worker count. When it is unset (or 1)
//! everything runs on the calling thread. Results are always returned in
//! input order, and every reduction downstream runs sequentially over that
//! order, so output does not depend on the thread count.

use std::sync::OnceLock;

use rayon::prelude::*;
use rayon::ThreadPool;

pub const THREADS_ENV: &str = "DIGIT_DIRICHLET_THREADS";

fn pool() -> Option<&'static ThreadPool> {
    static POOL: OnceLock<Option<ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 1)?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .ok()
    })
    .as_ref()
}

/// Configured worker count (1 in reference mode).
pub fn thread_count() -> usize {
    pool().map_or(1, |p| p.current_num_threads())
}

/// Maps `f` over `items`, preserving order.
pub fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match pool() {
        Some(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        None => items.iter().map(f).collect(),
    }
}
