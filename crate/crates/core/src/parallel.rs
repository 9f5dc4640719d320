//! Worker pools. Every parallel loop in the crate collects results in index
//! order and reduces them sequentially, so the worker count never changes
//! numeric output.

use std::sync::OnceLock;

/// Environment variable consulted when no explicit worker count is given.
pub const WORKERS_ENV: &str = "MEROMAP_WORKERS";

/// Run `f` on a pool of `workers` threads (`None`: the environment
/// variable, else the number of CPUs).
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    let n = workers
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(default_workers);
    match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn default_workers() -> usize {
    static N: OnceLock<usize> = OnceLock::new();
    *N.get_or_init(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}
