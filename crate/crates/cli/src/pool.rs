//! Bounded worker pool. `APDIFF_THREADS` caps the number of workers.

use rayon::ThreadPool;

pub const THREADS_VAR: &str = "APDIFF_THREADS";

pub fn thread_count() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn worker_pool() -> ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .expect("thread pool")
}
