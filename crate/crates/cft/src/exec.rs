//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the hot loops fan out over rayon;
//! without it the same code runs on one thread. All call sites reduce by
//! set-union or by index, so results are identical either way.

#[cfg(feature = "parallel")]
pub(crate) fn map_vec<T, R>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R>
where
    T: Send,
    R: Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_vec<T, R>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    items.into_iter().map(f).collect()
}

/// True when this build actually fans out over a thread pool.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Caps the worker pool at `threads` for the rest of the process. Only the
/// first cap in a process takes effect; later calls (and sequential builds)
/// are no-ops. `threads` must be at least 1.
pub fn cap_threads(threads: usize) {
    assert!(threads >= 1, "a worker pool needs at least one thread");
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}
