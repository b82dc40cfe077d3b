//! Parallel execution helpers.
//!
//! Work across samples or modes is always expressed as an indexed map
//! producing an ordered `Vec`, with reductions performed afterwards in index
//! order. That keeps results bit-identical between the sequential and
//! parallel paths and across thread counts. The `parallel` cargo feature
//! gates rayon entirely; `RD_THREADS` caps the pool size at runtime.

#[cfg(feature = "parallel")]
use std::sync::OnceLock;

/// How to execute an indexed map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// Parallel when compiled in and more than one thread is available.
    Auto,
    /// Always single-threaded, even with the `parallel` feature on.
    Sequential,
}

#[cfg(feature = "parallel")]
fn thread_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("RD_THREADS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .unwrap_or(0) // 0 = library default
    })
}

#[cfg(feature = "parallel")]
fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(thread_cap())
            .build()
            .expect("failed to build thread pool")
    })
}

/// Number of worker threads an `Auto` map will use.
pub fn effective_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        pool().current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Map `f` over `0..n`, returning results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Auto => {
            #[cfg(feature = "parallel")]
            {
                if effective_threads() > 1 && n > 1 {
                    use rayon::prelude::*;
                    return pool().install(|| (0..n).into_par_iter().map(f).collect());
                }
            }
            (0..n).map(f).collect()
        }
    }
}
